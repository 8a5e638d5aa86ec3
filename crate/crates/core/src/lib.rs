//! Sampling-based model predictive control with discrete barrier states.
//!
//! The crate provides three path-integral controllers that share one rollout
//! engine:
//!
//! - **Vanilla MPPI**: Gaussian perturbations, impulse collision penalty.
//! - **Log-MPPI**: normal-log-normal perturbations, impulse collision penalty.
//! - **DBaS-Log-MPPI**: normal-log-normal perturbations whose covariance is
//!   scaled by an exploration rate derived from the barrier cost of the
//!   current optimal plan, with a discrete barrier state appended to the
//!   dynamics and charged in the running cost.
//!
//! Two planar plants are supported (a pitch-controlled 2D quadrotor and an
//! Ackermann ground vehicle), together with circular-obstacle worlds,
//! benchmark missions and a closed-loop simulator that reports success rate,
//! tracking error and average speed.

pub mod barrier;
pub mod cli;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod sampling;
pub mod sim;
pub mod world;

pub use error::{Error, Result};
