//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use barrier_mppi::barrier::{augmented_step, dbas_recursion, AugmentedState, BarrierParams};
use barrier_mppi::controller::weights::weighted_perturbation;
use barrier_mppi::controller::{importance_weights, trajectory_cost, Controller, ControllerConfig, SavitzkyGolay, Variant};
use barrier_mppi::dynamics::{ControlVector, ModelParams, StateVector};
use barrier_mppi::sampling::{derive_seed, nln_moments, sample_gaussian, sample_nln};
use barrier_mppi::sim::{reference_point, run_mission_episodes, EpisodeResult, MissionSpec};
use barrier_mppi::world::{is_collision, Obstacle, Vec2, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: usize = 30;
const BASE_SEED: u64 = 0;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    nln_moment_suite(&mut r);
    weight_suite(&mut r);
    barrier_suite(&mut r);
    risk_discrimination(&mut r);
    smoothing_suite(&mut r);
    determinism(&mut r);
    throughput(&mut r);
    mission_benchmarks(&mut r);
    if r.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {}", r.failed.join(", "));
        std::process::exit(1);
    }
}

/// One-sided sign test: probability of at least `wins` successes in `n`
/// fair coin flips.
fn sign_test(wins: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        if k >= wins {
            p += binom;
        }
    }
    p / 2f64.powi(n as i32)
}

fn nln_moment_suite(r: &mut Report) {
    let start = Instant::now();
    // (variance, exploration rate, mu_ln, sigma_ln)
    let tuples = [
        (1.0, 1.0, -0.245, 0.7),
        (0.075, 1.0, -0.245, 0.7),
        (2.0, 0.4, 0.3, 0.2),
        (0.4, 1.3, -0.5, 1.0),
        (4.0, 0.5, 0.1, 0.5),
        (1.0, 1.0, 0.0, 0.0),
        (0.3, 2.0, 0.4, 0.0),
    ];
    let n = 1_000_000usize;
    let mut worst: f64 = 0.0;
    for (i, &(var, rate, mu_ln, sigma_ln)) in tuples.iter().enumerate() {
        let batch = sample_nln(1000, 1000, &[var], rate, mu_ln, sigma_ln, 1000 + i as u64).unwrap();
        assert_eq!(batch.deltas.len(), n);
        let (m_th, v_th) = nln_moments(0.0, (rate * var).sqrt(), mu_ln, sigma_ln);
        let mean = batch.deltas.iter().sum::<f64>() / n as f64;
        let m2 = batch.deltas.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = batch.deltas.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        let se_mean = (v_th / n as f64).sqrt();
        let se_var = ((m4 - m2 * m2) / n as f64).sqrt();
        worst = worst.max(((mean - m_th) / se_mean).abs()).max(((m2 - v_th) / se_var).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "4 (log-normal mixture moments)",
        worst < 3.0 && secs < 30.0,
        format!(
            "{} tuples x 1e6 samples, worst deviation {worst:.2} standard errors, {secs:.1} s",
            tuples.len()
        ),
    );
}

fn weight_suite(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut norm_err, mut scale_err): (f64, f64) = (0.0, 0.0);
    let (mut shift_ok, mut argmin_ok) = (true, true);
    for inst in 0..1000u64 {
        // costs on a 1/256 grid so that integer shifts are exact in floating point
        let costs: Vec<f64> = loop {
            let c: Vec<f64> = (0..64).map(|_| rng.gen_range(0..256 * 1000) as f64 / 256.0).collect();
            let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
            if c.iter().filter(|x| **x == min).count() == 1 {
                break c;
            }
        };
        let lambda = 10f64.powf(rng.gen_range(-2.0..2.0));
        let w = importance_weights(&costs, lambda).unwrap();
        norm_err = norm_err.max((w.iter().sum::<f64>() - 1.0).abs());

        let shift = rng.gen_range(-1000..1_000_000) as f64;
        let shifted: Vec<f64> = costs.iter().map(|c| c + shift).collect();
        shift_ok &= importance_weights(&shifted, lambda).unwrap() == w;

        let a = 10f64.powf(rng.gen_range(-1.0..1.0));
        let scaled: Vec<f64> = costs.iter().map(|c| c * a).collect();
        let ws = importance_weights(&scaled, lambda * a).unwrap();
        scale_err = w.iter().zip(&ws).map(|(x, y)| (x - y).abs()).fold(scale_err, f64::max);

        let batch = sample_gaussian(64, 20, &[0.4, 0.12], 1.0, inst).unwrap();
        let best = (0..64).min_by(|i, j| costs[*i].total_cmp(&costs[*j])).unwrap();
        let sharp = importance_weights(&costs, 1e-8).unwrap();
        let mean = weighted_perturbation(&batch, &sharp);
        let flat: Vec<f64> = mean.iter().flat_map(|u| u.0).collect();
        argmin_ok &= flat == batch.rollout(best);
    }
    r.line(
        "5 (importance weights)",
        norm_err <= 1e-12 && shift_ok && scale_err <= 1e-9 && argmin_ok,
        format!(
            "1000 instances: normalization error {norm_err:.1e}, shift invariance exact {shift_ok}, \
             scaling error {scale_err:.1e}, argmin selected {argmin_ok}"
        ),
    );
}

fn barrier_suite(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut fixed_err: f64 = 0.0;
    let mut contraction_err: f64 = 0.0;
    for _ in 0..1000 {
        let g = rng.gen_range(0.05..0.95);
        let p = BarrierParams {
            gamma_dbas: g,
            ..BarrierParams::default()
        };
        let bd = rng.gen_range(0.0..50.0);
        fixed_err = fixed_err.max((dbas_recursion(bd, bd, bd, &p) - bd).abs());
        // constant barrier value b: fixed point w* = (b - g bd) / (1 - g)
        let b = bd + rng.gen_range(0.0..50.0);
        let w_star = (b - g * bd) / (1.0 - g);
        let mut w = rng.gen_range(0.0..200.0);
        for _ in 0..20 {
            let next = dbas_recursion(w, b, bd, &p);
            let expected = g * (w - w_star).abs();
            contraction_err = contraction_err.max(((next - w_star).abs() - expected).abs() / (1.0 + w_star));
            w = next;
        }
    }

    let mut mismatches = 0usize;
    let mut colliding = [0usize; 2];
    for (mi, name) in ["mission1", "mission2"].iter().enumerate() {
        let m = MissionSpec::preset(name).unwrap();
        let shape = m.shape();
        let params = BarrierParams::default();
        let lim = m.model.control_limits();
        let goal = m.goal_state();
        for _ in 0..10_000 {
            let o = &m.world.obstacles[rng.gen_range(0..m.world.obstacles.len())];
            let reach = o.radius + 3.0 * m.model.characteristic_length();
            let start = loop {
                let p = o.center + Vec2::new(rng.gen_range(-reach..reach), rng.gen_range(-reach..reach));
                let a = rng.gen_range(-0.5..0.5);
                let s = match m.model {
                    ModelParams::Quadrotor(_) => StateVector::quadrotor(p.x, p.y, a, rng.gen_range(0.0..3.0), 0.0),
                    ModelParams::Vehicle(_) => StateVector::vehicle(p.x, p.y, a, rng.gen_range(2.0..8.0)),
                };
                if !is_collision(&s, &shape, &m.world) {
                    break s;
                }
            };
            let mut s = AugmentedState::new(start, &shape, &m.world, &params);
            let mut safe_by_barrier = s.w < params.beta_max;
            let mut safe_by_geometry = true;
            for _ in 0..40 {
                let u = ControlVector::new(rng.gen_range(-lim[0]..lim[0]), rng.gen_range(-lim[1]..lim[1]));
                s = augmented_step(&s, u, &goal, &m.model, &shape, &m.world, &params);
                safe_by_barrier &= s.w < params.beta_max;
                safe_by_geometry &= !is_collision(&s.physical, &shape, &m.world);
            }
            if safe_by_barrier != safe_by_geometry {
                mismatches += 1;
            }
            if !safe_by_geometry {
                colliding[mi] += 1;
            }
        }
    }
    r.line(
        "6 (barrier state)",
        fixed_err <= 1e-9 && contraction_err <= 1e-9 && mismatches == 0,
        format!(
            "fixed point error {fixed_err:.1e}, contraction error {contraction_err:.1e}; \
             safety equivalence on 2 x 10^4 rollouts ({} / {} colliding): {mismatches} mismatches",
            colliding[0], colliding[1]
        ),
    );
}

fn risk_discrimination(r: &mut Report) {
    let m = MissionSpec::preset("mission2").unwrap();
    let model = m.model;
    let shape = m.shape();
    let obstacle = Obstacle::new(Vec2::new(10.0, 0.0), 2.0).unwrap();
    let world = World::new(vec![obstacle]);
    let params = BarrierParams::default();
    let n = 20;
    let dt = model.dt();
    let goal = StateVector::vehicle(100.0, 0.0, 0.0, 5.0);
    // both drive straight at 5 m/s; the body edge passes 5 cm from the rim or 20 m away
    let lateral = |y: f64| -> Vec<StateVector> {
        (0..=n).map(|k| StateVector::vehicle(8.0 + 5.0 * k as f64 * dt, y, 0.0, 5.0)).collect()
    };
    let half_width = 1.5;
    let grazing = lateral(2.0 + half_width + 0.05);
    let distant = lateral(2.0 + half_width + 20.0);
    let barrier_of = |traj: &[StateVector]| -> Vec<f64> {
        let mut s = AugmentedState::new(traj[0], &shape, &world, &params);
        let mut w = vec![s.w];
        for x in &traj[1..] {
            s.physical = *x;
            s.w = barrier_mppi::barrier::dbas_update(s.w, x, &goal, &shape, &world, &params);
            w.push(s.w);
        }
        w
    };
    let controls = vec![ControlVector::ZERO; n];
    let score = |variant: Variant, traj: &[StateVector]| {
        let cfg = ControllerConfig::preset(variant, &model);
        let collided = traj.iter().any(|x| is_collision(x, &shape, &world));
        assert!(!collided);
        // each trajectory tracks itself, so tracking costs are identical (zero)
        trajectory_cost(traj, &barrier_of(traj), &controls, &controls, traj, collided, 1.0, &cfg).total
    };
    let (dg, dd) = (score(Variant::DbasLog, &grazing), score(Variant::DbasLog, &distant));
    let (vg, vd) = (score(Variant::Vanilla, &grazing), score(Variant::Vanilla, &distant));
    r.line(
        "7 (risk discrimination)",
        dg > dd && vg == vd,
        format!("barrier variant grazing {dg:.4} > distant {dd:.4}; vanilla grazing {vg} = distant {vd}"),
    );
}

fn smoothing_suite(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut poly_err: f64 = 0.0;
    let mut cases = 0;
    for window in [3usize, 5, 7, 9, 11, 21] {
        for order in 1..window.min(7) {
            for degree in 0..=order {
                for _ in 0..5 {
                    let len = rng.gen_range(window..window + 60);
                    let coef: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let xs: Vec<f64> = (0..len)
                        .map(|k| {
                            let t = k as f64 / len as f64;
                            coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
                        })
                        .collect();
                    let out = SavitzkyGolay::new(window, order, len).unwrap().apply(&xs);
                    poly_err = xs.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(poly_err, f64::max);
                    cases += 1;
                }
            }
        }
    }
    let filter = SavitzkyGolay::new(9, 3, 200).unwrap();
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let reduced = (0..100)
        .filter(|_| {
            let noise: Vec<f64> = (0..200).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            var(&filter.apply(&noise)) < var(&noise)
        })
        .count();
    r.line(
        "8 (smoothing filter)",
        poly_err <= 1e-9 && reduced == 100,
        format!("{cases} polynomial cases, max error {poly_err:.1e}; variance reduced in {reduced}/100 noise sequences"),
    );
}

fn determinism(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| -> Vec<u8> {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_barrier-mppi"))
            .args(["run", "--mission", "mission2", "--trials", "2", "--seed", "17", "--out"])
            .arg(&out)
            .env("BARRIER_MPPI_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("metrics.json")).unwrap()
    };
    let one = run("1");
    let same = [run("1"), run("2"), run("8")].iter().all(|m| *m == one);
    r.line(
        "9 (determinism)",
        same,
        format!("mission2 metrics.json with 1, 1, 2 and 8 threads byte-identical: {same}"),
    );
}

fn throughput(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for name in ["mission1", "mission2"] {
        let m = MissionSpec::preset(name).unwrap();
        for variant in [Variant::Vanilla, Variant::LogMppi, Variant::DbasLog] {
            let cfg = ControllerConfig::preset(variant, &m.model);
            assert_eq!((cfg.samples, cfg.horizon), (1024, 20));
            let mut c = Controller::new(cfg, m.model, m.shape(), m.world.clone())
                .unwrap()
                .with_goal(m.goal_state());
            let reference: Vec<StateVector> = (0..=20)
                .map(|k| reference_point(&m.reference, &m.model, m.v_set, k as f64 * m.model.dt()))
                .collect();
            c.control_step(&m.start, &reference, 0).unwrap();
            let start = Instant::now();
            for step in 0..100 {
                c.control_step(&m.start, &reference, derive_seed(1, step)).unwrap();
            }
            let ms = start.elapsed().as_secs_f64() * 10.0;
            worst = worst.max(ms);
            detail.push(format!("{name}/{} {ms:.2} ms", variant.name()));
        }
    }
    r.line(
        "10 (throughput)",
        worst < 50.0,
        format!(
            "mean control step over 100 steps, M = 1024, N = 20, {} threads: {}",
            rayon::current_num_threads(),
            detail.join(", ")
        ),
    );
}

struct Paired {
    wins: usize,
    n: usize,
    a_mean: f64,
    b_mean: f64,
}

/// Compares `a` against `b` over trials both controllers completed;
/// `a` wins a pair when `better(a, b)`.
fn paired(a: &[EpisodeResult], b: &[EpisodeResult], value: fn(&EpisodeResult) -> f64, a_lower: bool) -> Paired {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.success && y.success)
        .map(|(x, y)| (value(x), value(y)))
        .collect();
    let differing: Vec<&(f64, f64)> = pairs.iter().filter(|(x, y)| x != y).collect();
    let wins = differing.iter().filter(|(x, y)| if a_lower { x < y } else { x > y }).count();
    let count = pairs.len().max(1) as f64;
    Paired {
        wins,
        n: differing.len(),
        a_mean: pairs.iter().map(|p| p.0).sum::<f64>() / count,
        b_mean: pairs.iter().map(|p| p.1).sum::<f64>() / count,
    }
}

fn success_rate(eps: &[EpisodeResult]) -> f64 {
    100.0 * eps.iter().filter(|e| e.success).count() as f64 / eps.len() as f64
}

fn mission_benchmarks(r: &mut Report) {
    let start = Instant::now();
    let mut results = Vec::new();
    for name in ["mission1", "mission2", "mission3"] {
        let m = MissionSpec::preset(name).unwrap();
        let configs: Vec<ControllerConfig> = [Variant::Vanilla, Variant::LogMppi, Variant::DbasLog]
            .iter()
            .map(|v| ControllerConfig::preset(*v, &m.model))
            .collect();
        let eps = run_mission_episodes(&m, &configs, TRIALS, BASE_SEED).unwrap();
        results.push((name, eps));
    }
    let secs = start.elapsed().as_secs_f64();

    let mut ordered = true;
    let mut table = Vec::new();
    for (name, eps) in &results {
        let [v, l, d] = [success_rate(&eps[0]), success_rate(&eps[1]), success_rate(&eps[2])];
        ordered &= d >= l && l >= v;
        if *name != "mission3" {
            ordered &= d >= 95.0;
        }
        if *name == "mission2" {
            ordered &= v <= 50.0;
        }
        table.push(format!("{name} {v:.0}/{l:.0}/{d:.0}%"));
    }
    r.line(
        "1 (success rates)",
        ordered,
        format!("{TRIALS} paired trials, vanilla/log/barrier: {}", table.join(", ")),
    );
    r.line(
        "1 (runtime budget)",
        secs < 600.0,
        format!(
            "three missions x three controllers x {TRIALS} trials took {secs:.0} s on {} threads (budget 600 s)",
            rayon::current_num_threads()
        ),
    );

    let m2 = &results[1].1;
    let e = paired(&m2[2], &m2[1], |x| x.tracking_error, true);
    let p = sign_test(e.wins, e.n);
    r.line(
        "2 (mission2 tracking error)",
        e.a_mean < e.b_mean && p < 0.1,
        format!(
            "barrier {:.3} m vs log {:.3} m, barrier lower in {}/{} pairs, sign test p = {p:.3}",
            e.a_mean, e.b_mean, e.wins, e.n
        ),
    );

    let m1 = &results[0].1;
    let s = paired(&m1[2], &m1[1], |x| x.avg_speed, true);
    let p = sign_test(s.wins, s.n);
    r.line(
        "3 (mission1 speed)",
        s.a_mean < s.b_mean && p < 0.1,
        format!(
            "barrier {:.3} m/s vs log {:.3} m/s, barrier slower in {}/{} pairs, sign test p = {p:.2e}",
            s.a_mean, s.b_mean, s.wins, s.n
        ),
    );
}
