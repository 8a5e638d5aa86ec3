//! The MPPI loop shared by the three controller variants.
//!
//! One call to [`Controller::control_step`]:
//!
//! 1. samples `M` perturbation sequences at the current exploration rate,
//! 2. rolls every perturbed plan through the plant (with the barrier state
//!    for the barrier variant) and scores it,
//! 3. averages the perturbations with softmin weights, smooths the average
//!    with a Savitzky-Golay filter and adds it to the nominal plan,
//! 4. returns the first control, and for the barrier variant re-rolls the
//!    updated plan to refresh the exploration rate,
//! 5. shifts the plan one step for the next call.

pub mod cost;
pub mod savgol;
pub mod weights;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::{self, BarrierParams};
use crate::dynamics::{ControlVector, ModelParams, StateVector, CONTROL_DIM};
use crate::error::{Error, Result};
use crate::sampling::{adaptive_rate, PerturbationBatch, SamplingMode, SamplingParams};
use crate::world::{constraint_value, ShapeModel, Vec2, World};

pub use crate::dynamics::ControlSequence;
pub use cost::{running_cost, trajectory_cost, wrap_angle, CostBreakdown};
pub use savgol::{sg_smooth, SavitzkyGolay};
pub use weights::{effective_sample_size, importance_weights, weighted_update};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "vanilla")]
    Vanilla,
    #[serde(rename = "log", alias = "log-mppi")]
    LogMppi,
    #[serde(rename = "dbas-log", alias = "dbas-log-mppi")]
    DbasLog,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Vanilla, Variant::LogMppi, Variant::DbasLog];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::LogMppi => "log",
            Variant::DbasLog => "dbas-log",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Variant::Vanilla => "Vanilla MPPI",
            Variant::LogMppi => "Log-MPPI",
            Variant::DbasLog => "DBaS-Log-MPPI",
        }
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        match self {
            Variant::Vanilla => SamplingMode::Gaussian,
            Variant::LogMppi | Variant::DbasLog => SamplingMode::Nln,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vanilla" | "mppi" => Ok(Variant::Vanilla),
            "log" | "log-mppi" => Ok(Variant::LogMppi),
            "dbas-log" | "dbas" | "dbas-log-mppi" => Ok(Variant::DbasLog),
            other => Err(Error::config(format!(
                "unknown controller `{other}` (expected vanilla, log or dbas-log)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub variant: Variant,
    /// Number of sampled trajectories `M`.
    pub samples: usize,
    /// Horizon length `N` in steps.
    pub horizon: usize,
    /// Softmin temperature `lambda`.
    pub lambda: f64,
    /// Control-cost weight.
    pub gamma_ctrl: f64,
    pub sg_window: usize,
    pub sg_order: usize,
    /// Diagonal tracking weights `Q`, one per state component.
    pub state_weights: Vec<f64>,
    /// Terminal weight is `terminal_scale * Q`.
    pub terminal_scale: f64,
    /// Impulse cost charged once per colliding rollout (baselines only).
    pub collision_penalty: f64,
    pub sampling: SamplingParams,
    pub barrier: BarrierParams,
}

impl ControllerConfig {
    /// Default tuning for a variant on a model.
    pub fn preset(variant: Variant, model: &ModelParams) -> Self {
        let (sigma_u, lambda, state_weights, r_barrier) = match model {
            ModelParams::Quadrotor(_) => (vec![0.4, 0.12], 5.0, vec![5.0, 5.0, 5.0, 2.0, 2.0], 0.01),
            ModelParams::Vehicle(_) => (vec![0.075, 2.0], 10.0, vec![5.0, 5.0, 1.0, 0.5], 1.0),
        };
        ControllerConfig {
            variant,
            samples: 1024,
            horizon: 20,
            lambda,
            gamma_ctrl: 2.0,
            sg_window: 9,
            sg_order: 3,
            state_weights,
            terminal_scale: 10.0,
            collision_penalty: 1e5,
            sampling: SamplingParams::unit_mean_log_normal(sigma_u, 0.7, variant.sampling_mode()),
            barrier: BarrierParams {
                r_barrier,
                ..BarrierParams::default()
            },
        }
    }

    pub fn validate(&self, model: &ModelParams) -> Result<()> {
        if self.samples == 0 || self.horizon == 0 {
            return Err(Error::config("controller.samples and controller.horizon must be >= 1"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("controller.lambda must be positive"));
        }
        if !(self.gamma_ctrl >= 0.0 && self.gamma_ctrl.is_finite()) {
            return Err(Error::config("controller.gamma_ctrl must be non-negative"));
        }
        if !(self.terminal_scale >= 0.0 && self.collision_penalty >= 0.0) {
            return Err(Error::config("terminal_scale and collision_penalty must be non-negative"));
        }
        savgol::validate(self.sg_window, self.sg_order)?;
        if self.state_weights.len() != model.state_dim() {
            return Err(Error::config(format!(
                "controller.state_weights needs {} entries for the {} model, got {}",
                model.state_dim(),
                model.name(),
                self.state_weights.len()
            )));
        }
        if self.state_weights.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
            return Err(Error::config("controller.state_weights must be non-negative"));
        }
        if self.sampling.sigma_u.len() != CONTROL_DIM {
            return Err(Error::config(format!("sampling.sigma_u needs {CONTROL_DIM} entries")));
        }
        self.sampling.validate()?;
        self.barrier.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// Exploration rate used to sample this step.
    pub exploration_rate: f64,
    /// Exploration rate for the next step.
    pub next_exploration_rate: f64,
    pub min_cost: f64,
    pub mean_cost: f64,
    pub effective_sample_size: f64,
    /// Barrier cost of the updated plan (barrier variant only, else 0).
    pub barrier_cost_star: f64,
    pub applied: ControlVector,
}

/// Sampled and optimized trajectories at one step, for plotting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    pub sampled: Vec<Vec<Vec2>>,
    pub optimal: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub applied: ControlVector,
    pub diagnostics: StepDiagnostics,
    pub snapshot: Option<Snapshot>,
}

/// Receding-horizon controller state: the warm-start plan and the
/// exploration rate.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    model: ModelParams,
    shape: ShapeModel,
    world: World,
    goal: Option<StateVector>,
    smoother: SavitzkyGolay,
    nominal: ControlSequence,
    exploration_rate: f64,
    shape_reach: f64,
}

impl Controller {
    pub fn new(config: ControllerConfig, model: ModelParams, shape: ShapeModel, world: World) -> Result<Self> {
        config.validate(&model)?;
        model.validate()?;
        shape.validate()?;
        world.validate()?;
        let smoother = SavitzkyGolay::new(config.sg_window, config.sg_order, config.horizon)?;
        let nominal = ControlSequence::zeros(config.horizon);
        let shape_reach = shape.extent();
        let mut controller = Controller {
            config,
            model,
            shape,
            world,
            goal: None,
            smoother,
            nominal,
            exploration_rate: 1.0,
            shape_reach,
        };
        controller.reset();
        Ok(controller)
    }

    /// Desired state of the barrier recursion when configured as `goal`.
    pub fn with_goal(mut self, goal: StateVector) -> Self {
        self.goal = Some(goal);
        self
    }

    /// Zero plan and initial exploration rate.
    pub fn reset(&mut self) {
        self.nominal = ControlSequence::zeros(self.config.horizon);
        self.exploration_rate = self.initial_exploration_rate();
    }

    fn initial_exploration_rate(&self) -> f64 {
        match self.config.variant {
            Variant::DbasLog => self.config.sampling.mu_coarseness,
            Variant::Vanilla | Variant::LogMppi => 1.0,
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn nominal(&self) -> &ControlSequence {
        &self.nominal
    }

    pub fn set_nominal(&mut self, nominal: ControlSequence) -> Result<()> {
        if nominal.len() != self.config.horizon {
            return Err(Error::config("nominal plan length must equal the horizon"));
        }
        self.nominal = nominal;
        Ok(())
    }

    pub fn exploration_rate(&self) -> f64 {
        self.exploration_rate
    }

    pub fn sample(&self, seed: u64) -> Result<PerturbationBatch> {
        self.config
            .sampling
            .sample(self.config.samples, self.config.horizon, self.exploration_rate, seed)
    }

    fn collides(&self, state: &StateVector) -> bool {
        let pos = state.position();
        let angle = state.angle();
        self.world.obstacles.iter().any(|o| {
            let reach = o.radius + self.shape_reach;
            if (pos - o.center).norm_squared() > reach * reach {
                return false;
            }
            self.shape.points_at(pos, angle).any(|p| constraint_value(p, o) < 0.0)
        })
    }

    fn desired_barriers(&self, reference: &[StateVector]) -> Vec<f64> {
        let beta_max = self.config.barrier.beta_max;
        let n = self.config.horizon;
        match (self.config.barrier.desired_state, self.goal) {
            (barrier::DesiredState::Goal, Some(goal)) => {
                vec![barrier::fused_barrier(&goal, &self.shape, &self.world, beta_max); n + 1]
            }
            (barrier::DesiredState::Goal, None) => {
                vec![barrier::fused_barrier(&reference[n], &self.shape, &self.world, beta_max); n + 1]
            }
            (barrier::DesiredState::Reference, _) => reference[..=n]
                .iter()
                .map(|r| barrier::fused_barrier(r, &self.shape, &self.world, beta_max))
                .collect(),
        }
    }

    /// Scores every rollout of `batch` from `x0`.
    ///
    /// Returns the per-rollout costs and the batch of perturbations actually
    /// applied, i.e. `clamp(u + du) - u`.
    pub fn evaluate(
        &self,
        x0: &StateVector,
        reference: &[StateVector],
        batch: &PerturbationBatch,
    ) -> Result<(Vec<CostBreakdown>, PerturbationBatch)> {
        let n = self.config.horizon;
        if reference.len() <= n {
            return Err(Error::config(format!(
                "reference needs {} states, got {}",
                n + 1,
                reference.len()
            )));
        }
        if batch.horizon != n || batch.channels != CONTROL_DIM {
            return Err(Error::config("perturbation batch does not match the controller horizon"));
        }
        if !self.model.accepts(x0) || !x0.is_finite() {
            return Err(Error::config(format!("invalid initial state {x0:?}")));
        }
        let cfg = &self.config;
        let bp = &cfg.barrier;
        let dbas = cfg.variant == Variant::DbasLog;
        let check_collision = !dbas && !self.world.obstacles.is_empty();
        let desired = if dbas { self.desired_barriers(reference) } else { Vec::new() };
        let w0 = if dbas {
            barrier::fused_barrier(x0, &self.shape, &self.world, bp.beta_max)
        } else {
            0.0
        };
        let inv = cost::inverse_covariance(&cfg.sampling.sigma_u, batch.exploration_rate);
        let q = &cfg.state_weights;
        let nominal = &self.nominal.controls;

        let mut effective = batch.clone();
        let stride = n * CONTROL_DIM;
        let costs = effective
            .deltas
            .par_chunks_mut(stride)
            .enumerate()
            .map(|(m, eff)| {
                let raw = batch.rollout(m);
                let mut c = CostBreakdown::default();
                let mut x = *x0;
                let mut w = w0;
                let mut w_sum = w0;
                let mut collided = false;
                for k in 0..n {
                    c.state_cost += running_cost(&x, &reference[k], q);
                    let u = nominal[k];
                    let i = k * CONTROL_DIM;
                    let v = self
                        .model
                        .clamp_control(ControlVector([u.0[0] + raw[i], u.0[1] + raw[i + 1]]));
                    eff[i] = v.0[0] - u.0[0];
                    eff[i + 1] = v.0[1] - u.0[1];
                    c.control_cost += cost::control_cost(&u, &v, &inv, cfg.gamma_ctrl);
                    x = self.model.step(&x, v);
                    if dbas {
                        let b = barrier::fused_barrier(&x, &self.shape, &self.world, bp.beta_max);
                        w = barrier::dbas_recursion(w, b, desired[k + 1], bp);
                        w_sum += w;
                    } else if check_collision && !collided {
                        collided = self.collides(&x);
                    }
                }
                c.terminal_cost = cfg.terminal_scale * running_cost(&x, &reference[n], q);
                if dbas {
                    c.barrier_cost = bp.r_barrier * w_sum;
                } else if collided {
                    c.collision_cost = cfg.collision_penalty;
                }
                c.finish()
            })
            .collect::<Vec<_>>();
        Ok((costs, effective))
    }

    /// Barrier-state trajectory `w_0..w_N` of a plan from `x0`.
    pub fn barrier_trajectory(&self, x0: &StateVector, reference: &[StateVector], plan: &ControlSequence) -> Vec<f64> {
        let bp = &self.config.barrier;
        let desired = self.desired_barriers(reference);
        let mut w = barrier::fused_barrier(x0, &self.shape, &self.world, bp.beta_max);
        let mut out = Vec::with_capacity(plan.len() + 1);
        out.push(w);
        let mut x = *x0;
        for (k, &u) in plan.controls.iter().enumerate() {
            x = self.model.step(&x, self.model.clamp_control(u));
            let b = barrier::fused_barrier(&x, &self.shape, &self.world, bp.beta_max);
            w = barrier::dbas_recursion(w, b, desired[k + 1], bp);
            out.push(w);
        }
        out
    }

    pub fn control_step(&mut self, x0: &StateVector, reference: &[StateVector], seed: u64) -> Result<StepOutput> {
        self.control_step_with_snapshot(x0, reference, seed, 0)
    }

    /// Like [`Controller::control_step`]; with `snapshot_samples > 0` it also
    /// returns the positions of that many sampled rollouts and of the
    /// optimized plan.
    pub fn control_step_with_snapshot(
        &mut self,
        x0: &StateVector,
        reference: &[StateVector],
        seed: u64,
        snapshot_samples: usize,
    ) -> Result<StepOutput> {
        let exploration_rate = self.exploration_rate;
        let batch = self.sample(seed)?;
        let (breakdown, effective) = self.evaluate(x0, reference, &batch)?;
        let costs: Vec<f64> = breakdown.iter().map(|c| c.total).collect();
        let weights = importance_weights(&costs, self.config.lambda)?;

        let mean = weights::weighted_perturbation(&effective, &weights);
        let smoothed = self.smoother.apply_sequence(&ControlSequence { controls: mean });
        let updated = ControlSequence {
            controls: self
                .nominal
                .controls
                .iter()
                .zip(&smoothed.controls)
                .map(|(u, d)| self.model.clamp_control(ControlVector([u.0[0] + d.0[0], u.0[1] + d.0[1]])))
                .collect(),
        };
        let applied = updated.controls[0];

        let (barrier_cost_star, next_rate) = match self.config.variant {
            Variant::DbasLog => {
                let w = self.barrier_trajectory(x0, reference, &updated);
                let cb = barrier::barrier_cost(&w, self.config.barrier.r_barrier);
                (cb, adaptive_rate(cb, self.config.sampling.mu_coarseness))
            }
            Variant::Vanilla | Variant::LogMppi => (0.0, exploration_rate),
        };

        let snapshot = (snapshot_samples > 0).then(|| {
            let positions = |plan: &ControlSequence| -> Vec<Vec2> {
                self.model.rollout(x0, plan).iter().map(|s| s.position()).collect()
            };
            let sampled = (0..snapshot_samples.min(effective.samples))
                .map(|m| {
                    let d = effective.rollout(m);
                    let plan = ControlSequence {
                        controls: self
                            .nominal
                            .controls
                            .iter()
                            .enumerate()
                            .map(|(k, u)| ControlVector([u.0[0] + d[2 * k], u.0[1] + d[2 * k + 1]]))
                            .collect(),
                    };
                    positions(&plan)
                })
                .collect();
            Snapshot {
                sampled,
                optimal: positions(&updated),
            }
        });

        let diagnostics = StepDiagnostics {
            exploration_rate,
            next_exploration_rate: next_rate,
            min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
            mean_cost: costs.iter().sum::<f64>() / costs.len() as f64,
            effective_sample_size: effective_sample_size(&weights),
            barrier_cost_star,
            applied,
        };

        self.nominal = updated;
        self.nominal.shift();
        self.exploration_rate = next_rate;
        Ok(StepOutput {
            applied,
            diagnostics,
            snapshot,
        })
    }
}
