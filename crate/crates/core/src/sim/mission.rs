//! Benchmark scenarios.

use serde::{Deserialize, Serialize};

use super::reference::{reference_point, ReferencePath};
use crate::dynamics::{ModelParams, QuadrotorParams, StateVector, VehicleParams};
use crate::error::{Error, Result};
use crate::world::{is_collision, Bounds, Obstacle, ShapeModel, Vec2, World};

/// Names accepted by [`MissionSpec::preset`].
pub const PRESETS: [&str; 5] = ["mission1", "mission2", "mission3", "free-quadrotor", "free-vehicle"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSpec {
    pub name: String,
    pub model: ModelParams,
    #[serde(default)]
    pub world: World,
    /// Shape points; the model's preset when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeModel>,
    pub start: StateVector,
    pub reference: ReferencePath,
    /// Reference speed along the path.
    pub v_set: f64,
    /// Target position; the end of the reference when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_radius: Option<f64>,
    /// Step budget; three times the nominal traversal time when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_horizon: Option<usize>,
}

impl MissionSpec {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mission1" => Ok(mission1()),
            "mission2" => Ok(vehicle_slalom("mission2", 5.0)),
            "mission3" => Ok(vehicle_slalom("mission3", 8.0)),
            "free-quadrotor" => {
                let mut m = mission1();
                m.name = name.into();
                m.world = World::empty();
                Ok(m)
            }
            "free-vehicle" => {
                let mut m = vehicle_slalom(name, 5.0);
                m.world = World::empty();
                Ok(m)
            }
            other => Err(Error::config(format!(
                "unknown mission preset `{other}` (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn shape(&self) -> ShapeModel {
        self.shape.clone().unwrap_or_else(|| self.model.default_shape())
    }

    pub fn goal(&self) -> Vec2 {
        self.goal.unwrap_or_else(|| self.reference.end())
    }

    /// Twice the robot's characteristic length unless configured.
    pub fn goal_radius(&self) -> f64 {
        self.goal_radius
            .unwrap_or(2.0 * self.model.characteristic_length())
    }

    pub fn nominal_duration(&self) -> f64 {
        self.reference.length() / self.v_set
    }

    pub fn episode_horizon(&self) -> usize {
        self.episode_horizon
            .unwrap_or_else(|| (3.0 * self.nominal_duration() / self.model.dt()).ceil() as usize)
    }

    /// Resting state at the goal, used as the barrier recursion's desired state.
    pub fn goal_state(&self) -> StateVector {
        let end = reference_point(&self.reference, &self.model, self.v_set, f64::INFINITY);
        let goal = self.goal();
        match end {
            StateVector::Quadrotor(mut s) => {
                s[0] = goal.x;
                s[1] = goal.y;
                StateVector::Quadrotor(s)
            }
            StateVector::Vehicle(mut s) => {
                s[0] = goal.x;
                s[1] = goal.y;
                StateVector::Vehicle(s)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.world.validate()?;
        let shape = self.shape();
        shape.validate()?;
        if !(self.v_set > 0.0 && self.v_set.is_finite()) {
            return Err(Error::config("mission.v_set must be positive"));
        }
        if !self.model.accepts(&self.start) || !self.start.is_finite() {
            return Err(Error::config(format!(
                "mission.start must be a finite {} state with {} entries",
                self.model.name(),
                self.model.state_dim()
            )));
        }
        if is_collision(&self.start, &shape, &self.world) {
            return Err(Error::config("mission.start collides with an obstacle"));
        }
        if let Some(r) = self.goal_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config("mission.goal_radius must be positive"));
            }
        }
        if self.episode_horizon == Some(0) {
            return Err(Error::config("mission.episode_horizon must be >= 1"));
        }
        Ok(())
    }
}

fn obstacle(x: f64, y: f64, r: f64) -> Obstacle {
    Obstacle {
        center: Vec2::new(x, y),
        radius: r,
    }
}

/// Quadrotor threading three 0.8 m obstacles along a 20 m level path at 1 m/s.
fn mission1() -> MissionSpec {
    let model = ModelParams::Quadrotor(QuadrotorParams::default());
    let obstacles = vec![
        obstacle(5.0, 0.5, 0.8),
        obstacle(10.0, -0.5, 0.8),
        obstacle(15.0, 0.5, 0.8),
    ];
    MissionSpec {
        name: "mission1".into(),
        model,
        world: World {
            obstacles,
            bounds: Some(Bounds {
                min: Vec2::new(-1.0, -3.0),
                max: Vec2::new(21.0, 3.0),
            }),
        },
        shape: None,
        start: StateVector::quadrotor(0.0, 0.0, 0.0, 0.0, 0.0),
        reference: ReferencePath::new(vec![Vec2::new(0.0, 0.0), Vec2::new(20.0, 0.0)]).unwrap(),
        v_set: 1.0,
        goal: None,
        goal_radius: None,
        episode_horizon: None,
    }
}

/// Ground vehicle passing five 4.3 m obstacles along a 150 m straight path.
fn vehicle_slalom(name: &str, v_set: f64) -> MissionSpec {
    let model = ModelParams::Vehicle(VehicleParams::default());
    let obstacles = (0..5)
        .map(|i| {
            let side = if i % 2 == 0 { 1.0 } else { -1.0 };
            obstacle(30.0 + 22.0 * i as f64, 4.1 * side, 4.3)
        })
        .collect();
    MissionSpec {
        name: name.into(),
        model,
        world: World {
            obstacles,
            bounds: Some(Bounds {
                min: Vec2::new(-5.0, -15.0),
                max: Vec2::new(155.0, 15.0),
            }),
        },
        shape: None,
        start: StateVector::vehicle(0.0, 0.0, 0.0, v_set),
        reference: ReferencePath::new(vec![Vec2::new(0.0, 0.0), Vec2::new(150.0, 0.0)]).unwrap(),
        v_set,
        goal: None,
        goal_radius: None,
        episode_horizon: None,
    }
}
