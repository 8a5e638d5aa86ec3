//! Exponentially weighted control update.

use crate::dynamics::{ControlSequence, ControlVector, CONTROL_DIM};
use crate::error::{Error, Result};
use crate::sampling::PerturbationBatch;

/// Normalized weights `exp(-(S_m - rho) / lambda)` with `rho = min S`.
///
/// Sums run in index order so the result does not depend on how costs were
/// produced.
pub fn importance_weights(costs: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if costs.is_empty() {
        return Err(Error::DegenerateBatch("no trajectory costs".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("lambda must be positive, got {lambda}")));
    }
    if let Some(bad) = costs.iter().find(|c| !c.is_finite()) {
        return Err(Error::DegenerateBatch(format!("non-finite trajectory cost {bad}")));
    }
    let rho = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = costs.iter().map(|c| (-(c - rho) / lambda).exp()).collect();
    let total: f64 = weights.iter().sum();
    // the minimizer contributes exp(0) = 1
    debug_assert!(total >= 1.0);
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateBatch(format!("weight normalizer is {total}")));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// `1 / sum(w^2)` of normalized weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Weighted mean perturbation per horizon step.
pub fn weighted_perturbation(batch: &PerturbationBatch, weights: &[f64]) -> Vec<ControlVector> {
    assert_eq!(batch.channels, CONTROL_DIM);
    assert_eq!(weights.len(), batch.samples);
    let mut mean = vec![ControlVector::ZERO; batch.horizon];
    for (m, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let deltas = batch.rollout(m);
        for (k, u) in mean.iter_mut().enumerate() {
            for c in 0..CONTROL_DIM {
                u.0[c] += w * deltas[k * CONTROL_DIM + c];
            }
        }
    }
    mean
}

/// `u*_k = u_k + sum_m w_m du_{k,m}`, without smoothing or clamping.
pub fn weighted_update(
    nominal: &ControlSequence,
    batch: &PerturbationBatch,
    costs: &[f64],
    lambda: f64,
) -> Result<ControlSequence> {
    if costs.len() != batch.samples {
        return Err(Error::config(format!(
            "{} costs for {} sampled trajectories",
            costs.len(),
            batch.samples
        )));
    }
    if nominal.len() != batch.horizon {
        return Err(Error::config("nominal sequence and batch horizons differ"));
    }
    let weights = importance_weights(costs, lambda)?;
    let delta = weighted_perturbation(batch, &weights);
    let controls = nominal
        .controls
        .iter()
        .zip(delta)
        .map(|(u, d)| ControlVector([u.0[0] + d.0[0], u.0[1] + d.0[1]]))
        .collect();
    Ok(ControlSequence { controls })
}
