//! Evaluation harness: episodes under each controller, tolerance-sweep
//! reports, trajectory logs and SVG rendering.

mod episode;
mod eval;
mod report;
mod svg;
mod trajlog;

pub use episode::{run_episode, ControllerKind, EpisodeOutcome, EpisodeSetup};
pub use eval::{demo, episode_seed, evaluate, evaluate_with, load_agent, write_report, RunConfig, THREADS_ENV};
pub use report::{wilson_interval, EvalReport, ToleranceRate, REPORT_VERSION, TOLERANCES};
pub use svg::render_svg;
pub use trajlog::{parse_jsonl, read_jsonl, to_jsonl, write_jsonl, TickRecord};
