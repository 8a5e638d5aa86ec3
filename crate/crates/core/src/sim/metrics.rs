//! Trial aggregation: success rate and statistics over successful trials.

use rayon::prelude::*;
use serde::Serialize;

use super::episode::{run_episode_with, EpisodeOptions, EpisodeResult};
use super::mission::MissionSpec;
use crate::controller::{ControllerConfig, Variant};
use crate::error::{Error, Result};

/// Per-trial outcome without the step log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub success: bool,
    pub reached_goal: bool,
    pub collided: bool,
    pub tracking_error: f64,
    pub avg_speed: f64,
    pub steps: usize,
}

impl From<&EpisodeResult> for TrialSummary {
    fn from(e: &EpisodeResult) -> Self {
        TrialSummary {
            seed: e.seed,
            success: e.success,
            reached_goal: e.reached_goal,
            collided: e.collided,
            tracking_error: e.tracking_error,
            avg_speed: e.avg_speed,
            steps: e.steps,
        }
    }
}

/// Error and speed statistics cover successful trials only and are absent
/// when no trial succeeded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionMetrics {
    pub controller: Variant,
    pub trials: usize,
    pub successes: usize,
    pub collisions: usize,
    /// Percent.
    pub success_rate: f64,
    pub error_mean: Option<f64>,
    pub error_std: Option<f64>,
    pub speed_mean: Option<f64>,
    pub speed_std: Option<f64>,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

pub fn aggregate(controller: Variant, trials: &[TrialSummary]) -> MissionMetrics {
    // sort so the result does not depend on trial order
    let mut ok: Vec<&TrialSummary> = trials.iter().filter(|t| t.success).collect();
    ok.sort_by_key(|t| t.seed);
    let errors: Vec<f64> = ok.iter().map(|t| t.tracking_error).collect();
    let speeds: Vec<f64> = ok.iter().map(|t| t.avg_speed).collect();
    let (error_mean, error_std) = mean_std(&errors);
    let (speed_mean, speed_std) = mean_std(&speeds);
    let successes = ok.len();
    MissionMetrics {
        controller,
        trials: trials.len(),
        successes,
        collisions: trials.iter().filter(|t| t.collided).count(),
        success_rate: if trials.is_empty() {
            0.0
        } else {
            100.0 * successes as f64 / trials.len() as f64
        },
        error_mean,
        error_std,
        speed_mean,
        speed_std,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllerReport {
    pub metrics: MissionMetrics,
    pub trials: Vec<TrialSummary>,
}

/// Seed of trial `i`; shared by every controller so trials are paired.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

/// Runs every (controller, trial) episode, in parallel over the current
/// rayon pool. Results are ordered by controller, then trial.
pub fn run_mission_episodes(
    mission: &MissionSpec,
    configs: &[ControllerConfig],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<Vec<EpisodeResult>>> {
    run_mission_episodes_with(mission, configs, trials, base_seed, EpisodeOptions::default())
}

pub fn run_mission_episodes_with(
    mission: &MissionSpec,
    configs: &[ControllerConfig],
    trials: usize,
    base_seed: u64,
    options: EpisodeOptions,
) -> Result<Vec<Vec<EpisodeResult>>> {
    if trials == 0 {
        return Err(Error::config("trials must be >= 1"));
    }
    mission.validate()?;
    for c in configs {
        c.validate(&mission.model)?;
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, t)| run_episode_with(mission, &configs[c], trial_seed(base_seed, t), options))
        .collect::<Result<Vec<_>>>()?;
    let mut grouped: Vec<Vec<EpisodeResult>> = vec![Vec::with_capacity(trials); configs.len()];
    for ((c, _), r) in jobs.into_iter().zip(results) {
        grouped[c].push(r);
    }
    Ok(grouped)
}

pub fn summarize(configs: &[ControllerConfig], episodes: &[Vec<EpisodeResult>]) -> Vec<ControllerReport> {
    configs
        .iter()
        .zip(episodes)
        .map(|(c, eps)| {
            let trials: Vec<TrialSummary> = eps.iter().map(TrialSummary::from).collect();
            ControllerReport {
                metrics: aggregate(c.variant, &trials),
                trials,
            }
        })
        .collect()
}

pub fn run_mission(
    mission: &MissionSpec,
    configs: &[ControllerConfig],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<ControllerReport>> {
    let episodes = run_mission_episodes(mission, configs, trials, base_seed)?;
    Ok(summarize(configs, &episodes))
}
