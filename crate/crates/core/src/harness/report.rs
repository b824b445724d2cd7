//! Evaluation report: tolerance sweep, collision histogram and a text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::episode::{ControllerKind, EpisodeOutcome};

pub const REPORT_VERSION: u32 = 1;
pub const TOLERANCES: [usize; 3] = [0, 1, 2];

/// Wilson score interval at 95% for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> Option<[f64; 2]> {
    if n == 0 {
        return None;
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Some([(center - half).max(0.0), (center + half).min(1.0)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRate {
    pub tolerance: usize,
    pub successes: usize,
    /// Absent when no episodes were run.
    pub rate: Option<f64>,
    pub interval95: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub scenario: String,
    pub controller: ControllerKind,
    pub episodes: usize,
    pub seed: u64,
    pub success: Vec<ToleranceRate>,
    /// Goal reached regardless of collisions.
    pub reach_rate: Option<f64>,
    /// Collision count → number of episodes.
    pub collision_histogram: BTreeMap<usize, usize>,
    pub median_collisions: Option<f64>,
    pub mean_episode_length: Option<f64>,
    pub feasible_steps: usize,
    pub feasible_step_collisions: usize,
}

fn median(mut v: Vec<usize>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    })
}

impl EvalReport {
    /// Aggregates outcomes; order of `outcomes` does not matter.
    pub fn from_outcomes(scenario: &str, controller: ControllerKind, seed: u64, outcomes: &[EpisodeOutcome]) -> Self {
        let n = outcomes.len();
        let rate = |k: usize| (n > 0).then(|| k as f64 / n as f64);
        let success = TOLERANCES
            .iter()
            .map(|&tol| {
                let k = outcomes.iter().filter(|o| o.success_under(tol)).count();
                ToleranceRate {
                    tolerance: tol,
                    successes: k,
                    rate: rate(k),
                    interval95: wilson_interval(k, n),
                }
            })
            .collect();
        let mut hist = BTreeMap::new();
        for o in outcomes {
            *hist.entry(o.collisions).or_insert(0) += 1;
        }
        let total_len: usize = outcomes.iter().map(|o| o.length).sum();
        Self {
            version: REPORT_VERSION,
            scenario: scenario.to_string(),
            controller,
            episodes: n,
            seed,
            success,
            reach_rate: rate(outcomes.iter().filter(|o| o.reached).count()),
            collision_histogram: hist,
            median_collisions: median(outcomes.iter().map(|o| o.collisions).collect()),
            mean_episode_length: (n > 0).then(|| total_len as f64 / n as f64),
            feasible_steps: outcomes.iter().map(|o| o.feasible_steps).sum(),
            feasible_step_collisions: outcomes.iter().map(|o| o.feasible_step_collisions).sum(),
        }
    }

    pub fn rate_at(&self, tolerance: usize) -> Option<f64> {
        self.success.iter().find(|r| r.tolerance == tolerance).and_then(|r| r.rate)
    }

    /// `success(0) ≤ success(1) ≤ success(2)`.
    pub fn is_monotone(&self) -> bool {
        self.success.windows(2).all(|w| w[0].successes <= w[1].successes)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Success rates per tolerance in a fixed-width table.
    pub fn table(&self) -> String {
        let fmt_rate = |r: &ToleranceRate| match (r.rate, r.interval95) {
            (Some(p), Some([lo, hi])) => format!("{p:.2} [{lo:.2},{hi:.2}]"),
            _ => "-".to_string(),
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:<8} {:>8}  {:<17} {:<17} {:<17}",
            "scenario", "ctrl", "episodes", "N=0", "N=1", "N=2"
        );
        let _ = write!(out, "{:<24} {:<8} {:>8}", self.scenario, self.controller.as_str(), self.episodes);
        for r in &self.success {
            let _ = write!(out, "  {:<17}", fmt_rate(r));
        }
        out.push('\n');
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        let _ = writeln!(
            out,
            "reach {}  median collisions {}  mean length {}",
            opt(self.reach_rate),
            opt(self.median_collisions),
            opt(self.mean_episode_length)
        );
        out
    }
}
