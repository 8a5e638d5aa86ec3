use barrier_mppi::dynamics::{ControlSequence, ControlVector, ModelParams, QuadrotorParams, StateVector, VehicleParams};
use barrier_mppi::world::{
    constraint_value, is_collision, min_constraint, transform_shape_points, Obstacle, ShapeModel, Vec2, World,
    NO_OBSTACLE_SENTINEL,
};
use proptest::prelude::*;

fn models() -> [ModelParams; 2] {
    [
        ModelParams::Quadrotor(QuadrotorParams::default()),
        ModelParams::Vehicle(VehicleParams::default()),
    ]
}

#[test]
fn empty_world_never_collides() {
    let shape = ShapeModel::rectangle(4.0, 3.0);
    let x = StateVector::vehicle(1.0, -2.0, 0.4, 3.0);
    assert_eq!(min_constraint(&x, &shape, &World::empty()), NO_OBSTACLE_SENTINEL);
    assert!(!is_collision(&x, &shape, &World::empty()));
}

#[test]
fn quadrotor_frame_clips_obstacle_beside_center() {
    let world = World::new(vec![Obstacle::new(Vec2::new(0.3, 0.0), 0.15).unwrap()]);
    let shape = ShapeModel::quadrotor(0.4);
    // rotor tip at x = 0.2 sits inside the disc; the center does not
    assert!(is_collision(&StateVector::quadrotor(0.0, 0.0, 0.0, 0.0, 0.0), &shape, &world));
    assert!(!is_collision(&StateVector::quadrotor(0.0, 0.0, 0.0, 0.0, 0.0), &ShapeModel::point(), &world));
    // pitched by 90 degrees the frame is vertical and clears the disc
    let upright = StateVector::quadrotor(0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0);
    assert!(!is_collision(&upright, &shape, &world));
}

#[test]
fn vehicle_rollout_on_straight_line() {
    let model = ModelParams::Vehicle(VehicleParams::default());
    let plan = ControlSequence {
        controls: vec![ControlVector::ZERO; 50],
    };
    let traj = model.rollout(&StateVector::vehicle(0.0, 0.0, 0.0, 4.0), &plan);
    assert_eq!(traj.len(), 51);
    let end = traj.last().unwrap();
    assert!((end.position() - Vec2::new(4.0, 0.0)).norm() < 1e-9);
    assert_eq!(end.speed(), 4.0);
}

proptest! {
    #[test]
    fn constraint_sign_matches_disc_membership(
        px in -10.0..10.0f64, py in -10.0..10.0f64,
        cx in -10.0..10.0f64, cy in -10.0..10.0f64, r in 0.01..5.0f64,
    ) {
        let o = Obstacle::new(Vec2::new(cx, cy), r).unwrap();
        let p = Vec2::new(px, py);
        let d = (p - o.center).norm();
        let h = constraint_value(p, &o);
        prop_assume!((d - r).abs() > 1e-9);
        prop_assert_eq!(h < 0.0, d < r);
    }

    #[test]
    fn shape_transform_is_rigid(x in -50.0..50.0f64, y in -50.0..50.0f64, a in -7.0..7.0f64) {
        let shape = ShapeModel::rectangle(4.0, 3.0);
        let base = transform_shape_points(&StateVector::vehicle(0.0, 0.0, 0.0, 0.0), &shape);
        let moved = transform_shape_points(&StateVector::vehicle(x, y, a, 0.0), &shape);
        for i in 0..base.len() {
            for j in 0..base.len() {
                let d0 = (base[i] - base[j]).norm();
                let d1 = (moved[i] - moved[j]).norm();
                prop_assert!((d0 - d1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn min_constraint_is_min_over_obstacles(
        x in -5.0..5.0f64, y in -5.0..5.0f64, a in -3.2..3.2f64,
        c in prop::collection::vec((-6.0..6.0f64, -6.0..6.0f64, 0.1..2.0f64), 1..6),
    ) {
        let obstacles: Vec<_> = c.iter().map(|(cx, cy, r)| Obstacle::new(Vec2::new(*cx, *cy), *r).unwrap()).collect();
        let shape = ShapeModel::quadrotor(0.4);
        let state = StateVector::quadrotor(x, y, a, 0.0, 0.0);
        let all = min_constraint(&state, &shape, &World::new(obstacles.clone()));
        let each = obstacles
            .iter()
            .map(|o| min_constraint(&state, &shape, &World::new(vec![*o])))
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(all, each);
    }

    #[test]
    fn clamp_is_idempotent_and_bounded(u0 in -100.0..100.0f64, u1 in -100.0..100.0f64) {
        for model in models() {
            let c = model.clamp_control(ControlVector::new(u0, u1));
            prop_assert_eq!(model.clamp_control(c), c);
            let lim = model.control_limits();
            for (v, l) in c.0.iter().zip(lim) {
                prop_assert!(v.abs() <= l);
            }
        }
    }

    #[test]
    fn rollout_matches_repeated_steps(
        controls in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..30),
    ) {
        for model in models() {
            let x0 = match model {
                ModelParams::Quadrotor(_) => StateVector::quadrotor(0.5, 1.0, 0.1, 0.2, -0.1),
                ModelParams::Vehicle(_) => StateVector::vehicle(0.5, 1.0, 0.1, 3.0),
            };
            let plan = ControlSequence {
                controls: controls.iter().map(|(a, b)| model.clamp_control(ControlVector::new(*a, *b))).collect(),
            };
            let traj = model.rollout(&x0, &plan);
            let mut x = x0;
            for (k, u) in plan.controls.iter().enumerate() {
                x = model.step(&x, *u);
                prop_assert_eq!(x, traj[k + 1]);
                prop_assert!(x.is_finite());
            }
        }
    }
}
