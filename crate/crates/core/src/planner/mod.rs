//! Goal-conditioned RL planner: DDPG with hindsight relabeling and
//! hindsight goal generation.

mod ddpg;
mod her;
mod hgg;
mod hungarian;
mod replay;
mod train;
mod trajectory;

pub use ddpg::{AgentCheckpoint, AgentConfig, AgentManifest, DdpgAgent, UpdateStats, ACTION_DIM, AGENT_FORMAT_VERSION};
pub use her::{relabel_and_store, relabel_goals, HerStrategy};
pub use hgg::{
    candidate_scores, generate_intermediate_tasks, hgg_weight, match_trajectories, sample_targets,
    select_hindsight_goal, trajectory_values, weight_from_values, weight_matrix, HggConfig, HindsightTask,
    TargetTask, TrajectoryPool, ValueEstimate,
};
pub use hungarian::{assign, assignment_cost};
pub use replay::{ReplayBuffer, Transition};
pub use train::{curve_to_csv, run_episode, train, write_curve, CurveRow, Trainer};
pub use trajectory::{count_collision_events, Trajectory};
