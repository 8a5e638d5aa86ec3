//! Control perturbation samplers.
//!
//! Every rollout draws from its own ChaCha8 stream selected by
//! `(seed, rollout index, component)`. ChaCha is a counter-based generator,
//! so a stream can be opened anywhere without touching the others and a
//! batch comes out bit-identical no matter how rollouts are spread across
//! worker threads. Within a stream, draws are taken in `(timestep, channel)`
//! order.
//!
//! The Gaussian component and the log-normal multiplier use different
//! streams. With `sigma_ln = mu_ln = 0` the multiplier is exactly one and the
//! normal-log-normal sampler reproduces the Gaussian sampler bit for bit.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAUSSIAN_COMPONENT: u64 = 0;
const LOG_NORMAL_COMPONENT: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Gaussian,
    Nln,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingParams {
    /// Diagonal of the control covariance `Sigma_u`.
    pub sigma_u: Vec<f64>,
    pub mu_ln: f64,
    pub sigma_ln: f64,
    /// Free-space exploration rate `mu` of the adaptive variant.
    pub mu_coarseness: f64,
    pub mode: SamplingMode,
}

impl SamplingParams {
    /// Log-normal multiplier with unit mean: `mu_ln = -sigma_ln^2 / 2`.
    pub fn unit_mean_log_normal(sigma_u: Vec<f64>, sigma_ln: f64, mode: SamplingMode) -> Self {
        SamplingParams {
            sigma_u,
            mu_ln: -0.5 * sigma_ln * sigma_ln,
            sigma_ln,
            mu_coarseness: 0.4,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_u.is_empty() || self.sigma_u.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::config("sampling.sigma_u entries must be positive and finite"));
        }
        if !(self.sigma_ln >= 0.0 && self.sigma_ln.is_finite()) {
            return Err(Error::config("sampling.sigma_ln must be non-negative"));
        }
        if !self.mu_ln.is_finite() {
            return Err(Error::config("sampling.mu_ln must be finite"));
        }
        if !(self.mu_coarseness > 0.0 && self.mu_coarseness < 1.0) {
            return Err(Error::config(format!(
                "sampling.mu_coarseness must lie in (0, 1), got {}",
                self.mu_coarseness
            )));
        }
        Ok(())
    }

    pub fn sample(&self, samples: usize, horizon: usize, exploration_rate: f64, seed: u64) -> Result<PerturbationBatch> {
        match self.mode {
            SamplingMode::Gaussian => sample_gaussian(samples, horizon, &self.sigma_u, exploration_rate, seed),
            SamplingMode::Nln => sample_nln(
                samples,
                horizon,
                &self.sigma_u,
                exploration_rate,
                self.mu_ln,
                self.sigma_ln,
                seed,
            ),
        }
    }
}

/// `M x N x m` control perturbations, stored rollout-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationBatch {
    pub samples: usize,
    pub horizon: usize,
    pub channels: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub exploration_rate: f64,
}

impl PerturbationBatch {
    pub fn zeros(samples: usize, horizon: usize, channels: usize) -> Self {
        PerturbationBatch {
            samples,
            horizon,
            channels,
            deltas: vec![0.0; samples * horizon * channels],
            seed: 0,
            exploration_rate: 1.0,
        }
    }

    #[inline]
    pub fn get(&self, rollout: usize, step: usize, channel: usize) -> f64 {
        self.deltas[(rollout * self.horizon + step) * self.channels + channel]
    }

    /// All perturbations of one rollout, `(step, channel)` major.
    #[inline]
    pub fn rollout(&self, rollout: usize) -> &[f64] {
        let len = self.horizon * self.channels;
        &self.deltas[rollout * len..(rollout + 1) * len]
    }

    pub fn rollout_mut(&mut self, rollout: usize) -> &mut [f64] {
        let len = self.horizon * self.channels;
        &mut self.deltas[rollout * len..(rollout + 1) * len]
    }
}

/// Mixes `index` into `base` with the SplitMix64 finalizer.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, rollout: usize, component: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((rollout as u64) << 1) | component);
    rng
}

fn check_shape(samples: usize, horizon: usize, sigma: &[f64], exploration_rate: f64) -> Result<()> {
    if samples == 0 || horizon == 0 || sigma.is_empty() {
        return Err(Error::config(format!(
            "perturbation batch needs M, N, m >= 1 (got {samples}, {horizon}, {})",
            sigma.len()
        )));
    }
    if sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::config("covariance entries must be non-negative and finite"));
    }
    if !(exploration_rate >= 0.0 && exploration_rate.is_finite()) {
        return Err(Error::config("exploration rate must be non-negative and finite"));
    }
    Ok(())
}

fn generate(
    samples: usize,
    horizon: usize,
    sigma: &[f64],
    exploration_rate: f64,
    seed: u64,
    log_normal: Option<(f64, f64)>,
) -> Result<PerturbationBatch> {
    check_shape(samples, horizon, sigma, exploration_rate)?;
    let channels = sigma.len();
    let std: Vec<f64> = sigma.iter().map(|s| (exploration_rate * s).sqrt()).collect();
    let mut batch = PerturbationBatch::zeros(samples, horizon, channels);
    batch.seed = seed;
    batch.exploration_rate = exploration_rate;
    batch
        .deltas
        .par_chunks_mut(horizon * channels)
        .enumerate()
        .for_each(|(m, chunk)| {
            let mut normal = stream(seed, m, GAUSSIAN_COMPONENT);
            for (i, d) in chunk.iter_mut().enumerate() {
                let z: f64 = normal.sample(StandardNormal);
                *d = std[i % channels] * z;
            }
            if let Some((mu_ln, sigma_ln)) = log_normal {
                let mut scale = stream(seed, m, LOG_NORMAL_COMPONENT);
                for d in chunk.iter_mut() {
                    let z: f64 = scale.sample(StandardNormal);
                    *d *= (mu_ln + sigma_ln * z).exp();
                }
            }
        });
    Ok(batch)
}

/// Zero-mean Gaussian perturbations with per-channel variance
/// `exploration_rate * sigma[c]`.
pub fn sample_gaussian(
    samples: usize,
    horizon: usize,
    sigma: &[f64],
    exploration_rate: f64,
    seed: u64,
) -> Result<PerturbationBatch> {
    generate(samples, horizon, sigma, exploration_rate, seed, None)
}

/// Normal-log-normal perturbations: the Gaussian draw of [`sample_gaussian`]
/// times an independent `LN(mu_ln, sigma_ln)` multiplier.
pub fn sample_nln(
    samples: usize,
    horizon: usize,
    sigma: &[f64],
    exploration_rate: f64,
    mu_ln: f64,
    sigma_ln: f64,
    seed: u64,
) -> Result<PerturbationBatch> {
    if !(sigma_ln >= 0.0 && sigma_ln.is_finite() && mu_ln.is_finite()) {
        return Err(Error::config("log-normal parameters must be finite with sigma_ln >= 0"));
    }
    generate(samples, horizon, sigma, exploration_rate, seed, Some((mu_ln, sigma_ln)))
}

/// Mean and variance of `X1 * X2` with `X1 ~ N(mu_n, sigma_n^2)` and
/// `X2 ~ LN(mu_ln, sigma_ln^2)` independent.
pub fn nln_moments(mu_n: f64, sigma_n: f64, mu_ln: f64, sigma_ln: f64) -> (f64, f64) {
    let s2 = sigma_ln * sigma_ln;
    let mean = mu_n * (mu_ln + 0.5 * s2).exp();
    let variance =
        (mu_n * mu_n + sigma_n * sigma_n) * (2.0 * mu_ln + 2.0 * s2).exp() - mu_n * mu_n * (2.0 * mu_ln + s2).exp();
    (mean, variance)
}

/// Exploration rate `mu * ln(e + C_B)`.
pub fn adaptive_rate(barrier_cost_star: f64, mu_coarseness: f64) -> f64 {
    // ln(e + c) = 1 + ln(1 + c / e), exact at c = 0
    mu_coarseness * (1.0 + (barrier_cost_star.max(0.0) / E).ln_1p())
}
