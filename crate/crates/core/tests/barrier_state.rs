use barrier_mppi::barrier::{
    augmented_step, barrier_cost, barrier_fn, dbas_recursion, fused_barrier, AugmentedState, BarrierParams,
};
use barrier_mppi::dynamics::{ControlVector, ModelParams, StateVector, VehicleParams};
use barrier_mppi::world::{constraint_value, min_constraint, Obstacle, ShapeModel, Vec2, World};
use proptest::prelude::*;

const BETA_MAX: f64 = 1e6;

#[test]
fn fused_barrier_sums_inverse_constraints() {
    let world = World::new(vec![
        Obstacle::new(Vec2::new(3.0, 0.0), 1.0).unwrap(),
        Obstacle::new(Vec2::new(0.0, -2.0), 1.0).unwrap(),
    ]);
    let x = StateVector::vehicle(0.0, 0.0, 0.0, 0.0);
    // h = 9 - 1 and 4 - 1
    let b = fused_barrier(&x, &ShapeModel::point(), &world, BETA_MAX);
    assert!((b - (1.0 / 8.0 + 1.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn inside_obstacle_saturates() {
    let world = World::new(vec![Obstacle::new(Vec2::zeros(), 1.0).unwrap()]);
    let x = StateVector::vehicle(0.2, 0.0, 0.0, 0.0);
    assert_eq!(fused_barrier(&x, &ShapeModel::point(), &world, BETA_MAX), BETA_MAX);
    let p = BarrierParams::default();
    assert_eq!(dbas_recursion(0.0, BETA_MAX, 1.0, &p), BETA_MAX);
}

#[test]
fn recursion_frozen_values() {
    let p = BarrierParams::default();
    // 0.5 - 0.9 * (0.25 - 2.0)
    assert!((dbas_recursion(2.0, 0.5, 0.25, &p) - 2.075).abs() < 1e-15);
    // would go negative, clamped
    assert_eq!(dbas_recursion(0.0, 0.1, 10.0, &p), 0.0);
    assert_eq!(barrier_cost(&[1.0, 2.0, 3.5], 0.5), 3.25);
}

#[test]
fn vehicle_approaching_obstacle_raises_barrier_state() {
    let model = ModelParams::Vehicle(VehicleParams::default());
    let shape = ShapeModel::point();
    let world = World::new(vec![Obstacle::new(Vec2::new(10.0, 0.0), 1.0).unwrap()]);
    let params = BarrierParams::default();
    let goal = StateVector::vehicle(30.0, 10.0, 0.0, 0.0);
    let mut s = AugmentedState::new(StateVector::vehicle(0.0, 0.0, 0.0, 5.0), &shape, &world, &params);
    let mut prev = s.w;
    for _ in 0..80 {
        s = augmented_step(&s, ControlVector::ZERO, &goal, &model, &shape, &world, &params);
        assert!(s.w >= prev);
        prev = s.w;
    }
    assert!(s.w < BETA_MAX);
    assert!((s.physical.position().x - 8.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn barrier_fn_positive_and_decreasing(h1 in 1e-5..1e3f64, dh in 1e-6..1e2f64) {
        let a = barrier_fn(h1, BETA_MAX);
        let b = barrier_fn(h1 + dh, BETA_MAX);
        prop_assert!(a > 0.0 && b > 0.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn recursion_output_stays_in_range(
        w in 0.0..1e6f64, b in 0.0..2e6f64, bd in 0.0..1e3f64, g in 0.01..0.99f64,
    ) {
        let p = BarrierParams { gamma_dbas: g, ..BarrierParams::default() };
        let out = dbas_recursion(w, b.min(BETA_MAX), bd, &p);
        prop_assert!((0.0..=BETA_MAX).contains(&out));
    }

    #[test]
    fn barrier_saturates_exactly_on_contact(
        x in -3.0..3.0f64, y in -3.0..3.0f64, r in 0.1..2.0f64,
    ) {
        let world = World::new(vec![Obstacle::new(Vec2::zeros(), r).unwrap()]);
        let state = StateVector::vehicle(x, y, 0.0, 0.0);
        let h = constraint_value(Vec2::new(x, y), &world.obstacles[0]);
        prop_assume!(h.abs() > 1e-5);
        let b = fused_barrier(&state, &ShapeModel::point(), &world, BETA_MAX);
        prop_assert_eq!(b >= BETA_MAX, min_constraint(&state, &ShapeModel::point(), &world) < 0.0);
    }
}
