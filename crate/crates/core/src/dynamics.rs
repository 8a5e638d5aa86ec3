//! Discrete-time plant models `x_{k+1} = f(x_k, u_k)`.
//!
//! Both models are integrated with a single explicit Euler step per sample
//! period. Controls are two-channel for both plants:
//!
//! | model     | channel 0                 | channel 1                  |
//! |-----------|---------------------------|----------------------------|
//! | quadrotor | pitch rate `omega` [rad/s] | throttle `u_t` [N] over hover |
//! | vehicle   | steering angle `phi` [rad] | acceleration `a` [m/s^2]   |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{ShapeModel, Vec2};

/// Number of control channels of every supported model.
pub const CONTROL_DIM: usize = 2;

/// Index of the angle component (pitch or heading) in both state layouts.
pub const ANGLE_INDEX: usize = 2;

/// Plant state.
///
/// - `Quadrotor([x, z, theta, v_x, v_z])`, theta is pitch.
/// - `Vehicle([x, y, theta, v])`, theta is heading.
///
/// Angles are stored unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateVector {
    Quadrotor([f64; 5]),
    Vehicle([f64; 4]),
}

impl StateVector {
    pub fn quadrotor(x: f64, z: f64, pitch: f64, vx: f64, vz: f64) -> Self {
        StateVector::Quadrotor([x, z, pitch, vx, vz])
    }

    pub fn vehicle(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        StateVector::Vehicle([x, y, heading, speed])
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            StateVector::Quadrotor(s) => s,
            StateVector::Vehicle(s) => s,
        }
    }

    pub fn position(&self) -> Vec2 {
        let s = self.as_slice();
        Vec2::new(s[0], s[1])
    }

    pub fn angle(&self) -> f64 {
        self.as_slice()[ANGLE_INDEX]
    }

    /// Magnitude of the planar velocity.
    pub fn speed(&self) -> f64 {
        match self {
            StateVector::Quadrotor(s) => s[3].hypot(s[4]),
            StateVector::Vehicle(s) => s[3].abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlVector(pub [f64; CONTROL_DIM]);

impl ControlVector {
    pub const ZERO: ControlVector = ControlVector([0.0; CONTROL_DIM]);

    pub fn new(c0: f64, c1: f64) -> Self {
        ControlVector([c0, c1])
    }
}

/// Receding-horizon control plan `U = {u_0, ..., u_{N-1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub controls: Vec<ControlVector>,
}

impl ControlSequence {
    pub fn zeros(horizon: usize) -> Self {
        ControlSequence {
            controls: vec![ControlVector::ZERO; horizon],
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    /// Values of one control channel along the horizon.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.controls.iter().map(|u| u.0[c]).collect()
    }

    /// Drops `u_0`, moves every entry one slot forward and zeroes the tail.
    pub fn shift(&mut self) {
        if self.controls.is_empty() {
            return;
        }
        self.controls.rotate_left(1);
        if let Some(last) = self.controls.last_mut() {
            *last = ControlVector::ZERO;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrotorParams {
    pub dt: f64,
    pub mass: f64,
    pub frame_length: f64,
    /// Kept for completeness; pitch rate is commanded directly so the
    /// discrete model does not use it.
    pub inertia: f64,
    pub gravity: f64,
    pub max_pitch_rate: f64,
    pub max_thrust: f64,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        QuadrotorParams {
            dt: 0.02,
            mass: 0.5,
            frame_length: 0.4,
            inertia: 0.005,
            gravity: 9.81,
            max_pitch_rate: 4.0,
            max_thrust: 0.981,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    pub dt: f64,
    pub wheelbase: f64,
    /// Body length along the heading, used for the shape preset.
    pub length: f64,
    pub width: f64,
    pub max_steering: f64,
    pub max_acceleration: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            dt: 0.02,
            wheelbase: 3.0,
            length: 4.0,
            width: 3.0,
            max_steering: 1.013,
            max_acceleration: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Quadrotor(QuadrotorParams),
    Vehicle(VehicleParams),
}

impl ModelParams {
    pub fn dt(&self) -> f64 {
        match self {
            ModelParams::Quadrotor(p) => p.dt,
            ModelParams::Vehicle(p) => p.dt,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Quadrotor(_) => "quadrotor",
            ModelParams::Vehicle(_) => "vehicle",
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            ModelParams::Quadrotor(_) => 5,
            ModelParams::Vehicle(_) => 4,
        }
    }

    /// Symmetric saturation limits per control channel.
    pub fn control_limits(&self) -> [f64; CONTROL_DIM] {
        match self {
            ModelParams::Quadrotor(p) => [p.max_pitch_rate, p.max_thrust],
            ModelParams::Vehicle(p) => [p.max_steering, p.max_acceleration],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            ModelParams::Quadrotor(p) => {
                positive("model.dt", p.dt)?;
                positive("model.mass", p.mass)?;
                positive("model.frame_length", p.frame_length)?;
                positive("model.inertia", p.inertia)?;
                positive("model.gravity", p.gravity)?;
                positive("model.max_pitch_rate", p.max_pitch_rate)?;
                positive("model.max_thrust", p.max_thrust)
            }
            ModelParams::Vehicle(p) => {
                positive("model.dt", p.dt)?;
                positive("model.wheelbase", p.wheelbase)?;
                positive("model.length", p.length)?;
                positive("model.width", p.width)?;
                positive("model.max_steering", p.max_steering)?;
                positive("model.max_acceleration", p.max_acceleration)
            }
        }
    }

    /// Shape-point preset matching the body geometry.
    pub fn default_shape(&self) -> ShapeModel {
        match self {
            ModelParams::Quadrotor(p) => ShapeModel::quadrotor(p.frame_length),
            ModelParams::Vehicle(p) => ShapeModel::rectangle(p.length, p.width),
        }
    }

    /// Longest body dimension.
    pub fn characteristic_length(&self) -> f64 {
        match self {
            ModelParams::Quadrotor(p) => p.frame_length,
            ModelParams::Vehicle(p) => p.length.max(p.width),
        }
    }

    /// Whether `state` has the layout this model integrates.
    pub fn accepts(&self, state: &StateVector) -> bool {
        matches!(
            (self, state),
            (ModelParams::Quadrotor(_), StateVector::Quadrotor(_))
                | (ModelParams::Vehicle(_), StateVector::Vehicle(_))
        )
    }

    /// State that moves along `direction` (unit vector) at `speed` through
    /// `position`. The quadrotor reference is level (zero pitch).
    pub fn reference_state(&self, position: Vec2, direction: Vec2, speed: f64) -> StateVector {
        match self {
            ModelParams::Quadrotor(_) => StateVector::quadrotor(
                position.x,
                position.y,
                0.0,
                speed * direction.x,
                speed * direction.y,
            ),
            ModelParams::Vehicle(_) => StateVector::vehicle(
                position.x,
                position.y,
                direction.y.atan2(direction.x),
                speed,
            ),
        }
    }

    pub fn clamp_control(&self, u: ControlVector) -> ControlVector {
        clamp_control(u, self)
    }

    /// One integration step with an already clamped control. Panics if the
    /// state layout belongs to the other model.
    pub fn step(&self, x: &StateVector, u: ControlVector) -> StateVector {
        match (self, x) {
            (ModelParams::Quadrotor(p), StateVector::Quadrotor(s)) => {
                StateVector::Quadrotor(step_quadrotor(s, u, p))
            }
            (ModelParams::Vehicle(p), StateVector::Vehicle(s)) => {
                StateVector::Vehicle(step_ackermann(s, u, p))
            }
            _ => panic!("{} model cannot integrate state {:?}", self.name(), x),
        }
    }

    /// `N + 1` states starting at `x0`; step `k` applies the clamped `controls[k]`.
    pub fn rollout(&self, x0: &StateVector, controls: &ControlSequence) -> Vec<StateVector> {
        let mut states = Vec::with_capacity(controls.len() + 1);
        states.push(*x0);
        let mut x = *x0;
        for &u in &controls.controls {
            x = self.step(&x, self.clamp_control(u));
            states.push(x);
        }
        states
    }
}

/// Saturates each channel to the model's symmetric limits.
pub fn clamp_control(u: ControlVector, params: &ModelParams) -> ControlVector {
    let lim = params.control_limits();
    ControlVector([u.0[0].clamp(-lim[0], lim[0]), u.0[1].clamp(-lim[1], lim[1])])
}

/// Planar quadrotor, state `[x, z, theta, v_x, v_z]`, control `[omega, u_t]`.
pub fn step_quadrotor(s: &[f64; 5], u: ControlVector, p: &QuadrotorParams) -> [f64; 5] {
    let [x, z, theta, vx, vz] = *s;
    let [omega, thrust] = u.0;
    let dt = p.dt;
    let accel = (p.mass * p.gravity + thrust) / p.mass;
    let (sin, cos) = theta.sin_cos();
    [
        x + vx * dt,
        z + vz * dt,
        theta + omega * dt,
        vx - accel * sin * dt,
        vz + (accel * cos - p.gravity) * dt,
    ]
}

/// Kinematic Ackermann vehicle, state `[x, y, theta, v]`, control `[phi, a]`.
pub fn step_ackermann(s: &[f64; 4], u: ControlVector, p: &VehicleParams) -> [f64; 4] {
    let [x, y, theta, v] = *s;
    let [phi, a] = u.0;
    let dt = p.dt;
    let (sin, cos) = theta.sin_cos();
    [
        x + v * cos * dt,
        y + v * sin * dt,
        theta + v * phi.tan() / p.wheelbase * dt,
        v + a * dt,
    ]
}
