//! JSONL trajectory log: one record per executed tick.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::StepDiagnostics;
use crate::env::{BoxObstacle, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    /// Tick after the step.
    pub tick: u64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub goal: Vec3,
    pub action: Vec3,
    pub collided: bool,
    pub success: bool,
    pub obstacles: Vec<BoxObstacle>,
    /// Controller diagnostics; absent for the pure policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepDiagnostics>,
}

pub fn to_jsonl(records: &[TickRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, records: &[TickRecord]) -> Result<()> {
    std::fs::write(path, to_jsonl(records)?).map_err(|e| Error::io(path, e))
}

/// Parses a log; blank lines are skipped, errors carry 1-based line numbers.
pub fn parse_jsonl(text: &str, path: &Path) -> Result<Vec<TickRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TickRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(tick: u64) -> TickRecord {
        TickRecord {
            tick,
            position: Vec3::new(0.1, 0.2, 0.02),
            velocity: Vec3::ZERO,
            goal: Vec3::new(0.4, 0.6, 0.02),
            action: Vec3::new(1.0, 0.0, 0.0),
            collided: false,
            success: false,
            obstacles: vec![],
            step: None,
        }
    }

    #[test]
    fn round_trip() {
        let recs = vec![record(1), record(2)];
        let text = to_jsonl(&recs).unwrap();
        assert_eq!(parse_jsonl(&text, Path::new("x")).unwrap(), recs);
    }

    #[test]
    fn bad_line_reports_number() {
        let text = format!("{}\n{{not json\n", serde_json::to_string(&record(1)).unwrap());
        match parse_jsonl(&text, Path::new("log.jsonl")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
