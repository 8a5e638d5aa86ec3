//! Closed-loop episodes.

use serde::Serialize;

use super::mission::MissionSpec;
use super::reference::{reference_point, tracking_error};
use crate::controller::{Controller, ControllerConfig, Snapshot};
use crate::dynamics::{ControlVector, StateVector};
use crate::error::Result;
use crate::sampling::derive_seed;
use crate::world::{is_collision, Vec2};

/// One closed-loop step: the control applied at time `t` and the state it
/// produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// Time at which the control was applied.
    pub t: f64,
    /// State reached after applying `control`.
    pub state: StateVector,
    pub control: ControlVector,
    pub exploration_rate: f64,
    pub min_cost: f64,
    pub effective_sample_size: f64,
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub seed: u64,
    /// Goal reached with no collision.
    pub success: bool,
    pub reached_goal: bool,
    pub collided: bool,
    pub tracking_error: f64,
    pub avg_speed: f64,
    pub steps: usize,
    /// Executed states, `steps + 1` entries starting with the mission start.
    pub trajectory: Vec<StateVector>,
    pub log: Vec<StepRecord>,
    pub snapshot: Option<(usize, Snapshot)>,
}

impl EpisodeResult {
    pub fn positions(&self) -> Vec<Vec2> {
        self.trajectory.iter().map(|s| s.position()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeOptions {
    /// Record sampled rollouts at this step.
    pub snapshot_step: Option<usize>,
    pub snapshot_samples: usize,
}

pub fn run_episode(mission: &MissionSpec, config: &ControllerConfig, seed: u64) -> Result<EpisodeResult> {
    run_episode_with(mission, config, seed, EpisodeOptions::default())
}

pub fn run_episode_with(
    mission: &MissionSpec,
    config: &ControllerConfig,
    seed: u64,
    options: EpisodeOptions,
) -> Result<EpisodeResult> {
    mission.validate()?;
    let shape = mission.shape();
    let model = mission.model;
    let dt = model.dt();
    let mut controller =
        Controller::new(config.clone(), model, shape.clone(), mission.world.clone())?.with_goal(mission.goal_state());
    let goal = mission.goal();
    let goal_radius = mission.goal_radius();
    let horizon = config.horizon;

    let mut x = mission.start;
    let mut trajectory = vec![x];
    let mut log = Vec::new();
    let mut snapshot = None;
    let mut reached_goal = (x.position() - goal).norm() <= goal_radius;
    let mut collided = false;
    let mut reference = Vec::with_capacity(horizon + 1);

    let mut step = 0;
    while !reached_goal && step < mission.episode_horizon() {
        let t = step as f64 * dt;
        reference.clear();
        reference.extend(
            (0..=horizon).map(|k| reference_point(&mission.reference, &model, mission.v_set, t + k as f64 * dt)),
        );
        let samples = match options.snapshot_step {
            Some(s) if s == step => options.snapshot_samples.max(1),
            _ => 0,
        };
        let out = controller.control_step_with_snapshot(&x, &reference, derive_seed(seed, step as u64), samples)?;
        if let Some(s) = out.snapshot {
            snapshot = Some((step, s));
        }
        let applied = model.clamp_control(out.applied);
        x = model.step(&x, applied);
        let collision = is_collision(&x, &shape, &mission.world);
        trajectory.push(x);
        log.push(StepRecord {
            step,
            t,
            state: x,
            control: applied,
            exploration_rate: out.diagnostics.exploration_rate,
            min_cost: out.diagnostics.min_cost,
            effective_sample_size: out.diagnostics.effective_sample_size,
            collision,
        });
        step += 1;
        if collision {
            collided = true;
            break;
        }
        reached_goal = (x.position() - goal).norm() <= goal_radius;
    }

    let positions: Vec<Vec2> = trajectory.iter().map(|s| s.position()).collect();
    let path_length: f64 = positions.windows(2).map(|p| (p[1] - p[0]).norm()).sum();
    let avg_speed = if step > 0 { path_length / (step as f64 * dt) } else { 0.0 };
    Ok(EpisodeResult {
        seed,
        success: reached_goal && !collided,
        reached_goal,
        collided,
        tracking_error: tracking_error(&positions, &mission.reference),
        avg_speed,
        steps: step,
        trajectory,
        log,
        snapshot,
    })
}
