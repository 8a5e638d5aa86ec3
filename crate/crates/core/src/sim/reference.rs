//! Polyline reference paths traversed at constant speed.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, StateVector};
use crate::error::{Error, Result};
use crate::world::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct ReferencePath {
    waypoints: Vec<Vec2>,
    // arc length at each waypoint
    cumulative: Vec<f64>,
}

/// A point on the path with its unit tangent and commanded speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub position: Vec2,
    pub direction: Vec2,
    pub speed: f64,
}

impl TryFrom<Vec<Vec2>> for ReferencePath {
    type Error = Error;

    fn try_from(waypoints: Vec<Vec2>) -> Result<Self> {
        ReferencePath::new(waypoints)
    }
}

impl From<ReferencePath> for Vec<Vec2> {
    fn from(path: ReferencePath) -> Self {
        path.waypoints
    }
}

impl ReferencePath {
    pub fn new(waypoints: Vec<Vec2>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::config("reference path needs at least two waypoints"));
        }
        if waypoints.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::config("reference waypoints must be finite"));
        }
        let mut cumulative = Vec::with_capacity(waypoints.len());
        cumulative.push(0.0);
        for pair in waypoints.windows(2) {
            let seg = (pair[1] - pair[0]).norm();
            if seg <= 0.0 {
                return Err(Error::config("reference path has repeated waypoints"));
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Ok(ReferencePath { waypoints, cumulative })
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.waypoints.last().unwrap()
    }

    /// Point at arc length `s`, clamped to the path.
    pub fn at_distance(&self, s: f64) -> (Vec2, Vec2) {
        let s = s.clamp(0.0, self.length());
        let seg = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.waypoints.len() - 2),
            Err(i) => i - 1,
        };
        let (a, b) = (self.waypoints[seg], self.waypoints[seg + 1]);
        let len = self.cumulative[seg + 1] - self.cumulative[seg];
        let direction = (b - a) / len;
        (a + direction * (s - self.cumulative[seg]), direction)
    }

    /// The reference after travelling `v_set * t`; zero speed once the end
    /// is reached.
    pub fn sample(&self, v_set: f64, t: f64) -> PathSample {
        let s = v_set * t.max(0.0);
        let (position, direction) = self.at_distance(s);
        let speed = if s >= self.length() { 0.0 } else { v_set };
        PathSample {
            position,
            direction,
            speed,
        }
    }

    /// Euclidean distance from `p` to the closest point of the polyline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.waypoints
            .windows(2)
            .map(|pair| {
                let (a, b) = (pair[0], pair[1]);
                let ab = b - a;
                let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (a + ab * t - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reference state of `model` at time `t`.
pub fn reference_point(path: &ReferencePath, model: &ModelParams, v_set: f64, t: f64) -> StateVector {
    let s = path.sample(v_set, t);
    model.reference_state(s.position, s.direction, s.speed)
}

/// Mean distance of the executed positions from the path.
pub fn tracking_error(positions: &[Vec2], path: &ReferencePath) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    positions.iter().map(|p| path.distance_to(*p)).sum::<f64>() / positions.len() as f64
}
