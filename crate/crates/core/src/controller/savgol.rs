//! Savitzky-Golay smoothing.
//!
//! Each output sample is the value at that position of the least-squares
//! polynomial of degree `order` fitted to `window` neighbouring samples. Near
//! the ends the window is kept inside the sequence and the fit is evaluated
//! off-center, so no padding or mirroring is involved.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ControlSequence, CONTROL_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Row {
    start: usize,
    weights: Vec<f64>,
}

/// Precomputed filter for sequences of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct SavitzkyGolay {
    window: usize,
    order: usize,
    len: usize,
    // empty when len < window: the filter is the identity
    rows: Vec<Row>,
}

pub fn validate(window: usize, order: usize) -> Result<()> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::config(format!(
            "Savitzky-Golay window must be odd and >= 3, got {window}"
        )));
    }
    if order < 1 || order >= window {
        return Err(Error::config(format!(
            "Savitzky-Golay order must lie in [1, window), got {order} for window {window}"
        )));
    }
    Ok(())
}

/// Weights that evaluate the least-squares fit over `window` equally spaced
/// samples at `offset` samples from the window center.
pub fn coefficients(window: usize, order: usize, offset: f64) -> Vec<f64> {
    let half = (window / 2) as f64;
    let cols = order + 1;
    // positions scaled to [-1, 1] for conditioning
    let design = DMatrix::from_fn(window, cols, |j, p| ((j as f64 - half) / half).powi(p as i32));
    let gram = design.transpose() * &design;
    let t = offset / half;
    let target = DVector::from_fn(cols, |p, _| t.powi(p as i32));
    let y = gram
        .cholesky()
        .expect("Vandermonde Gram matrix is positive definite for order < window")
        .solve(&target);
    (design * y).iter().copied().collect()
}

impl SavitzkyGolay {
    pub fn new(window: usize, order: usize, len: usize) -> Result<Self> {
        validate(window, order)?;
        let half = window / 2;
        let rows = if len < window {
            Vec::new()
        } else {
            let center = coefficients(window, order, 0.0);
            (0..len)
                .map(|i| {
                    if i < half {
                        Row {
                            start: 0,
                            weights: coefficients(window, order, i as f64 - half as f64),
                        }
                    } else if i + half >= len {
                        let start = len - window;
                        Row {
                            start,
                            weights: coefficients(window, order, (i - start) as f64 - half as f64),
                        }
                    } else {
                        Row {
                            start: i - half,
                            weights: center.clone(),
                        }
                    }
                })
                .collect()
        };
        Ok(SavitzkyGolay {
            window,
            order,
            len,
            rows,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Whether sequences are passed through unchanged (shorter than the window).
    pub fn is_identity(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.len, "filter built for length {}", self.len);
        if self.is_identity() {
            return input.to_vec();
        }
        self.rows
            .iter()
            .map(|row| {
                row.weights
                    .iter()
                    .zip(&input[row.start..row.start + self.window])
                    .map(|(w, x)| w * x)
                    .sum()
            })
            .collect()
    }

    /// Filters every control channel independently.
    pub fn apply_sequence(&self, sequence: &ControlSequence) -> ControlSequence {
        let mut out = sequence.clone();
        for c in 0..CONTROL_DIM {
            let filtered = self.apply(&sequence.channel(c));
            for (u, v) in out.controls.iter_mut().zip(filtered) {
                u.0[c] = v;
            }
        }
        out
    }
}

/// One-shot smoothing of a control sequence.
pub fn sg_smooth(sequence: &ControlSequence, window: usize, order: usize) -> Result<ControlSequence> {
    Ok(SavitzkyGolay::new(window, order, sequence.len())?.apply_sequence(sequence))
}
