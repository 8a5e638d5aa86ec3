//! Trajectory cost-to-go.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::{ControllerConfig, Variant};
use crate::barrier::barrier_cost;
use crate::dynamics::{ControlVector, StateVector, ANGLE_INDEX, CONTROL_DIM};

/// Wraps an angle to `(-pi, pi]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Weighted squared tracking error; the angle difference is wrapped.
#[inline]
pub fn running_cost(state: &StateVector, reference: &StateVector, weights: &[f64]) -> f64 {
    state
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .zip(weights)
        .enumerate()
        .map(|(i, ((x, r), q))| {
            let d = if i == ANGLE_INDEX { wrap_angle(x - r) } else { x - r };
            q * d * d
        })
        .sum()
}

/// `gamma * u^T (S_e Sigma_u)^-1 v` for one step.
#[inline]
pub fn control_cost(nominal: &ControlVector, perturbed: &ControlVector, inv_sigma: &[f64; CONTROL_DIM], gamma: f64) -> f64 {
    gamma
        * (0..CONTROL_DIM)
            .map(|c| nominal.0[c] * inv_sigma[c] * perturbed.0[c])
            .sum::<f64>()
}

/// `1 / (S_e * sigma_c)` per channel.
pub fn inverse_covariance(sigma: &[f64], exploration_rate: f64) -> [f64; CONTROL_DIM] {
    let mut inv = [0.0; CONTROL_DIM];
    for (i, s) in inv.iter_mut().zip(sigma) {
        *i = 1.0 / (exploration_rate * s);
    }
    inv
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub state_cost: f64,
    pub control_cost: f64,
    pub barrier_cost: f64,
    pub collision_cost: f64,
    pub terminal_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn finish(mut self) -> Self {
        self.total = self.state_cost + self.control_cost + self.barrier_cost + self.collision_cost + self.terminal_cost;
        self
    }
}

/// Cost of one materialized rollout.
///
/// `states` and `barrier` hold `N + 1` entries, `perturbed`, `nominal` hold
/// `N` and `references` holds `N + 1`. The barrier term is charged only by the
/// barrier variant; the other variants pay `collision_penalty` once when
/// `collided` is set.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_cost(
    states: &[StateVector],
    barrier: &[f64],
    perturbed: &[ControlVector],
    nominal: &[ControlVector],
    references: &[StateVector],
    collided: bool,
    exploration_rate: f64,
    config: &ControllerConfig,
) -> CostBreakdown {
    let n = nominal.len();
    assert_eq!(perturbed.len(), n);
    assert_eq!(states.len(), n + 1);
    assert!(references.len() > n);
    let inv = inverse_covariance(&config.sampling.sigma_u, exploration_rate);
    let q = &config.state_weights;
    let mut cost = CostBreakdown::default();
    for k in 0..n {
        cost.state_cost += running_cost(&states[k], &references[k], q);
        cost.control_cost += control_cost(&nominal[k], &perturbed[k], &inv, config.gamma_ctrl);
    }
    cost.terminal_cost = config.terminal_scale * running_cost(&states[n], &references[n], q);
    match config.variant {
        Variant::DbasLog => cost.barrier_cost = barrier_cost(barrier, config.barrier.r_barrier),
        Variant::Vanilla | Variant::LogMppi => {
            if collided {
                cost.collision_cost = config.collision_penalty;
            }
        }
    }
    cost.finish()
}
