//! Missions, closed-loop episodes and benchmark metrics.

pub mod episode;
pub mod metrics;
pub mod mission;
pub mod reference;

pub use episode::{run_episode, run_episode_with, EpisodeOptions, EpisodeResult, StepRecord};
pub use metrics::{
    aggregate, run_mission, run_mission_episodes, run_mission_episodes_with, summarize, trial_seed, ControllerReport, MissionMetrics,
    TrialSummary,
};
pub use mission::{MissionSpec, PRESETS};
pub use reference::{reference_point, tracking_error, ReferencePath};
