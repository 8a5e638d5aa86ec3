//! Discrete barrier states.
//!
//! The barrier function is the inverse barrier `B(h) = 1/h`, saturated at
//! `beta_max` once `h` drops to the floor [`BARRIER_FLOOR`]. The barrier state
//! `w` is carried alongside the physical state and evolves as
//!
//! ```text
//! w_{k+1} = B(h(x_{k+1})) - gamma * (B(h(x_d)) - w_k)
//! ```
//!
//! clamped to `[0, beta_max]`. With many constraints the per-constraint
//! barriers are summed into one fused barrier.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlVector, ModelParams, StateVector};
use crate::error::{Error, Result};
use crate::world::{ShapeModel, World};

/// Smallest constraint value (squared meters) treated as strictly safe.
pub const BARRIER_FLOOR: f64 = 1e-6;

/// Which state plays `x_d` in the barrier recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesiredState {
    /// The reference point at the same horizon step.
    Reference,
    /// The end of the reference path.
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    /// Contraction rate of the barrier recursion, in (0, 1).
    pub gamma_dbas: f64,
    /// Cost weight `R_B` on the barrier state.
    pub r_barrier: f64,
    /// Saturation value standing in for an unbounded barrier.
    pub beta_max: f64,
    pub desired_state: DesiredState,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            gamma_dbas: 0.9,
            r_barrier: 1.0,
            beta_max: 1e6,
            desired_state: DesiredState::Goal,
        }
    }
}

impl BarrierParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_dbas > 0.0 && self.gamma_dbas < 1.0) {
            return Err(Error::config(format!(
                "barrier.gamma_dbas must lie in (0, 1), got {}",
                self.gamma_dbas
            )));
        }
        if !(self.r_barrier >= 0.0 && self.r_barrier.is_finite()) {
            return Err(Error::config("barrier.r_barrier must be non-negative"));
        }
        if !(self.beta_max > 0.0 && self.beta_max.is_finite()) {
            return Err(Error::config("barrier.beta_max must be positive and finite"));
        }
        Ok(())
    }
}

/// Physical state extended with its barrier state `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub physical: StateVector,
    pub w: f64,
}

impl AugmentedState {
    /// Starts the barrier state at `B(h(x))`.
    pub fn new(physical: StateVector, shape: &ShapeModel, world: &World, params: &BarrierParams) -> Self {
        AugmentedState {
            physical,
            w: fused_barrier(&physical, shape, world, params.beta_max),
        }
    }
}

/// Inverse barrier `1/h`, or `beta_max` when `h <= BARRIER_FLOOR`.
#[inline]
pub fn barrier_fn(h: f64, beta_max: f64) -> f64 {
    if h > BARRIER_FLOOR {
        (1.0 / h).min(beta_max)
    } else {
        beta_max
    }
}

/// Sum of the barrier over every (shape point, obstacle) pair, saturated at
/// `beta_max`. Zero in an empty world.
pub fn fused_barrier(state: &StateVector, shape: &ShapeModel, world: &World, beta_max: f64) -> f64 {
    const LANES: usize = 8;
    let pos = state.position();
    let (s, c) = state.angle().sin_cos();
    let mut total = 0.0;
    for chunk in shape.offsets.chunks(LANES) {
        let mut px = [0.0; LANES];
        let mut py = [0.0; LANES];
        for (i, o) in chunk.iter().enumerate() {
            px[i] = pos.x + c * o.x - s * o.y;
            py[i] = pos.y + s * o.x + c * o.y;
        }
        let mut acc = [0.0; LANES];
        for ob in &world.obstacles {
            let r2 = ob.radius * ob.radius;
            for i in 0..LANES {
                let dx = px[i] - ob.center.x;
                let dy = py[i] - ob.center.y;
                acc[i] += barrier_fn(dx * dx + dy * dy - r2, beta_max);
            }
        }
        total += acc[..chunk.len()].iter().sum::<f64>();
    }
    total.min(beta_max)
}

/// The barrier recursion on precomputed barrier values, clamped to
/// `[0, beta_max]`. A saturated `barrier_next` (the state left the safe set)
/// saturates the barrier state as well.
#[inline]
pub fn dbas_recursion(w_prev: f64, barrier_next: f64, barrier_desired: f64, params: &BarrierParams) -> f64 {
    if barrier_next >= params.beta_max {
        return params.beta_max;
    }
    (barrier_next - params.gamma_dbas * (barrier_desired - w_prev)).clamp(0.0, params.beta_max)
}

pub fn dbas_update(
    w_prev: f64,
    next_state: &StateVector,
    desired_state: &StateVector,
    shape: &ShapeModel,
    world: &World,
    params: &BarrierParams,
) -> f64 {
    if world.obstacles.is_empty() {
        // no constraints, no barrier state
        return 0.0;
    }
    dbas_recursion(
        w_prev,
        fused_barrier(next_state, shape, world, params.beta_max),
        fused_barrier(desired_state, shape, world, params.beta_max),
        params,
    )
}

/// Advances the physical state with the clamped control, then the barrier
/// state with the new physical state.
pub fn augmented_step(
    state: &AugmentedState,
    u: ControlVector,
    desired_state: &StateVector,
    model: &ModelParams,
    shape: &ShapeModel,
    world: &World,
    params: &BarrierParams,
) -> AugmentedState {
    let physical = model.step(&state.physical, model.clamp_control(u));
    let w = dbas_update(state.w, &physical, desired_state, shape, world, params);
    AugmentedState { physical, w }
}

/// `R_B * sum(w)` over a barrier-state trajectory.
pub fn barrier_cost(traj_w: &[f64], r_barrier: f64) -> f64 {
    r_barrier * traj_w.iter().sum::<f64>()
}
