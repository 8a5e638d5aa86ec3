//! Circular obstacles, robot shape points and the obstacle constraint `h`.
//!
//! For a shape point `p` and an obstacle with center `c` and radius `r` the
//! constraint is `h = |p - c|^2 - r^2`. It is positive outside the obstacle,
//! zero on its rim and negative inside. A state is collision-free when `h >= 0`
//! holds for every (shape point, obstacle) pair.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Value reported by [`min_constraint`] for a world without obstacles.
///
/// A large finite number rather than `f64::INFINITY` so that downstream cost
/// arithmetic never produces `inf - inf`.
pub const NO_OBSTACLE_SENTINEL: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

impl Obstacle {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        let obstacle = Obstacle { center, radius };
        obstacle.validate()?;
        Ok(obstacle)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::config(format!(
                "obstacle radius must be positive and finite, got {}",
                self.radius
            )));
        }
        if !(self.center.x.is_finite() && self.center.y.is_finite()) {
            return Err(Error::config("obstacle center must be finite"));
        }
        Ok(())
    }
}

/// Body-frame points at which obstacle constraints are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeModel {
    pub offsets: Vec<Vec2>,
}

impl ShapeModel {
    pub fn new(offsets: Vec<Vec2>) -> Result<Self> {
        let shape = ShapeModel { offsets };
        shape.validate()?;
        Ok(shape)
    }

    /// A single point at the robot origin.
    pub fn point() -> Self {
        ShapeModel {
            offsets: vec![Vec2::zeros()],
        }
    }

    /// Seven points on a planar quadrotor frame: the frame ends, the quarter
    /// points and the center, plus the two propellers which sit on the frame
    /// ends (no vertical offset).
    pub fn quadrotor(frame_length: f64) -> Self {
        let half = 0.5 * frame_length;
        let quarter = 0.25 * frame_length;
        let offsets = [-half, -quarter, 0.0, quarter, half, -half, half]
            .into_iter()
            .map(|x| Vec2::new(x, 0.0))
            .collect();
        ShapeModel { offsets }
    }

    /// Four corners and four edge midpoints of a `length` x `width` rectangle
    /// centered on the vehicle origin, `length` along the heading.
    pub fn rectangle(length: f64, width: f64) -> Self {
        let (hl, hw) = (0.5 * length, 0.5 * width);
        let offsets = vec![
            Vec2::new(hl, hw),
            Vec2::new(hl, -hw),
            Vec2::new(-hl, -hw),
            Vec2::new(-hl, hw),
            Vec2::new(hl, 0.0),
            Vec2::new(0.0, -hw),
            Vec2::new(-hl, 0.0),
            Vec2::new(0.0, hw),
        ];
        ShapeModel { offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.offsets.is_empty() {
            return Err(Error::config("shape model needs at least one point"));
        }
        if self.offsets.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::config("shape offsets must be finite"));
        }
        Ok(())
    }

    /// Distance from the body origin to the farthest shape point.
    pub fn extent(&self) -> f64 {
        self.offsets.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// World-frame shape points for a pose.
    pub fn points_at(&self, position: Vec2, angle: f64) -> impl Iterator<Item = Vec2> + '_ {
        let (s, c) = angle.sin_cos();
        self.offsets
            .iter()
            .map(move |o| Vec2::new(position.x + c * o.x - s * o.y, position.y + s * o.x + c * o.y))
    }
}

/// Axis-aligned rectangle, used for plotting extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.max.x > self.min.x && self.max.y > self.min.y) {
            return Err(Error::config("bounds must have positive area"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

impl World {
    pub fn new(obstacles: Vec<Obstacle>) -> Self {
        World {
            obstacles,
            bounds: None,
        }
    }

    pub fn empty() -> Self {
        World::default()
    }

    pub fn validate(&self) -> Result<()> {
        for obstacle in &self.obstacles {
            obstacle.validate()?;
        }
        if let Some(bounds) = &self.bounds {
            bounds.validate()?;
        }
        Ok(())
    }
}

/// Rotates every offset by the state's angle and translates it to the
/// state's position.
pub fn transform_shape_points(state: &StateVector, shape: &ShapeModel) -> Vec<Vec2> {
    shape.points_at(state.position(), state.angle()).collect()
}

#[inline]
pub fn constraint_value(point: Vec2, obstacle: &Obstacle) -> f64 {
    let dx = point.x - obstacle.center.x;
    let dy = point.y - obstacle.center.y;
    dx * dx + dy * dy - obstacle.radius * obstacle.radius
}

/// Smallest constraint value over all (shape point, obstacle) pairs, or
/// [`NO_OBSTACLE_SENTINEL`] for an obstacle-free world.
pub fn min_constraint(state: &StateVector, shape: &ShapeModel, world: &World) -> f64 {
    if world.obstacles.is_empty() {
        return NO_OBSTACLE_SENTINEL;
    }
    shape
        .points_at(state.position(), state.angle())
        .flat_map(|p| world.obstacles.iter().map(move |o| constraint_value(p, o)))
        .fold(f64::INFINITY, f64::min)
}

/// `h = 0` (touching the rim) counts as safe.
pub fn is_collision(state: &StateVector, shape: &ShapeModel, world: &World) -> bool {
    min_constraint(state, shape, world) < 0.0
}
