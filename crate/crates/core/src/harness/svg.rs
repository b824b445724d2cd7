//! Static top-down SVG of a logged episode.

use std::fmt::Write as _;

use crate::env::{BoxObstacle, Vec3};

use super::trajlog::TickRecord;

const SCALE: f64 = 600.0;
const PAD: f64 = 20.0;
/// Obstacles and predictions are drawn every this many ticks.
const SNAPSHOT_EVERY: usize = 10;

struct Frame {
    min: Vec3,
    max: Vec3,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        PAD + (v - self.min.x) * SCALE
    }

    fn y(&self, v: f64) -> f64 {
        PAD + (self.max.y - v) * SCALE
    }

    fn width(&self) -> f64 {
        (self.max.x - self.min.x) * SCALE + 2.0 * PAD
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y) * SCALE + 2.0 * PAD
    }

    fn point(&self, p: Vec3) -> String {
        format!("{:.2},{:.2}", self.x(p.x), self.y(p.y))
    }
}

fn rect(out: &mut String, f: &Frame, ob: &BoxObstacle, opacity: f64) {
    let lo = ob.center - ob.half_extents;
    let _ = writeln!(
        out,
        r##"  <rect class="obstacle" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#c0392b" fill-opacity="{opacity:.2}"/>"##,
        f.x(lo.x),
        f.y(lo.y + 2.0 * ob.half_extents.y),
        2.0 * ob.half_extents.x * SCALE,
        2.0 * ob.half_extents.y * SCALE,
    );
}

/// Renders ticks onto the x-y plane of the workspace `[min, max]`.
pub fn render_svg(records: &[TickRecord], workspace_min: Vec3, workspace_max: Vec3) -> String {
    let f = Frame {
        min: workspace_min,
        max: workspace_max,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"##,
        w = f.width(),
        h = f.height()
    );
    let _ = writeln!(
        out,
        r##"  <rect class="workspace" x="{PAD}" y="{PAD}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"##,
        f.width() - 2.0 * PAD,
        f.height() - 2.0 * PAD
    );

    let snapshots = records
        .iter()
        .enumerate()
        .filter(|(i, _)| i % SNAPSHOT_EVERY == 0 || *i + 1 == records.len());
    for (i, r) in snapshots {
        let opacity = 0.15 + 0.5 * (i + 1) as f64 / records.len() as f64;
        for ob in &r.obstacles {
            rect(&mut out, &f, ob, opacity);
        }
        if let Some(step) = &r.step {
            if !step.predicted.is_empty() {
                let pts: Vec<String> = step.predicted.iter().map(|p| f.point(*p)).collect();
                let _ = writeln!(
                    out,
                    r##"  <polyline class="prediction" points="{}" fill="none" stroke="#2980b9" stroke-dasharray="4 3"/>"##,
                    pts.join(" ")
                );
            }
        }
    }

    for r in records {
        if let Some(step) = &r.step {
            let g = step.intermediate_goal;
            if g != r.goal {
                let (x, y) = (f.x(g.x), f.y(g.y));
                let _ = writeln!(
                    out,
                    r##"  <path class="subgoal" d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="#8e44ad"/>"##,
                    x - 3.0,
                    y - 3.0,
                    x + 3.0,
                    y + 3.0,
                    x - 3.0,
                    y + 3.0,
                    x + 3.0,
                    y - 3.0
                );
            }
        }
    }

    if !records.is_empty() {
        let pts: Vec<String> = records.iter().map(|r| f.point(r.position)).collect();
        let _ = writeln!(
            out,
            r##"  <polyline class="path" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
        let g = records[0].goal;
        let _ = writeln!(
            out,
            r##"  <circle class="goal" cx="{:.2}" cy="{:.2}" r="5" fill="#27ae60"/>"##,
            f.x(g.x),
            f.y(g.y)
        );
    }
    out.push_str("</svg>\n");
    out
}
