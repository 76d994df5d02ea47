//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::Instant;

use dunkl::calculus::{dunkl_apply_poly, Intertwiner};
use dunkl::grid::GridFunction;
use dunkl::polynomial::{monomials_of_degree, Polynomial};
use dunkl::root_systems::{RootSystem, WeightContext};
use dunkl::semilinear_wave::{
    energy_check, lifespan_experiment, picard_solve, solve_linear_wave, LifespanOptions, LifespanOutcome,
    PicardOptions, QuadraticFormQ, SemilinearProblem, WaveState,
};
use dunkl::spectral::{build_transform, kernel_zd, random_bump, DunklTransform, SpectralField};
use dunkl::symmetric_systems::{
    build_system, bump_wave_data, default_initial_data, friedrichs_solve, propagation_experiment,
    verify_energy_estimate, wave_to_system, CoefficientField, ConeKind, ConeOptions, FirstOrderTerms,
    FriedrichsOptions, SymmetricSystemSpec, WaveSampling, ENERGY_TOLERANCE, SYSTEM_PRESETS,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ctx(k: &[f64]) -> WeightContext {
    WeightContext::new(RootSystem::z2_power(k).unwrap()).unwrap()
}

fn standard(k: &[f64]) -> DunklTransform {
    build_transform(&ctx(k), 80, 0.1, 48, 6.0).unwrap()
}

fn gaussian(x: &[f64]) -> f64 {
    (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

fn grid_fn(t: &DunklTransform, f: impl Fn(&[f64]) -> f64) -> GridFunction {
    GridFunction::from_fn(t.spatial().clone(), f).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `∫ f(x) e^{−ixξ} dx` by the trapezoid rule on `[−14, 14]`, independent of the library grids.
fn classical_fourier(f: &dyn Fn(&[f64]) -> f64, xi: f64) -> Complex64 {
    let h = 0.01;
    let n = 1400;
    (-n..=n)
        .map(|i| {
            let x = i as f64 * h;
            f(&[x]) * Complex64::new(0.0, -x * xi).exp()
        })
        .sum::<Complex64>()
        * h
}

fn criterion_1() -> Outcome {
    let t = standard(&[0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xi: Vec<f64> = (0..t.frequency().len()).map(|m| t.frequency().grid().point(m)[0]).collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = random_bump(&mut rng, 1);
        let got = t.forward(&grid_fn(&t, &f)).unwrap();
        let exact: Vec<Complex64> = xi.iter().map(|&x| classical_fourier(&f, x)).collect();
        let scale = exact.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let err = got.coeffs().iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        worst = worst.max(err / scale);
    }
    let start = Instant::now();
    let spec = build_system("transport", ctx(&[0.0])).unwrap();
    let run = friedrichs_solve(&spec, &t, &[grid_fn(&t, gaussian)], &FriedrichsOptions::new(6.0, 0.05, 0.5)).unwrap();
    let u = &run.state_on_grid(&t, run.times.len() - 1).unwrap()[0];
    let exact = grid_fn(&t, |x| gaussian(&[x[0] + 0.5]));
    let transport = max_abs_diff(u.values(), exact.values());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-5 && transport < 1e-4 && secs < 30.0,
        format!("Fourier rel. error {worst:.2e}, transport error {transport:.2e} at t = 0.5 in {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &k in &[0.0, 0.5, 0.7, 1.5] {
        for d in 1..=3usize {
            let ks: Vec<f64> = (0..d).map(|j| k * (1.0 + 0.25 * j as f64)).collect();
            let rs = RootSystem::z2_power(&ks).unwrap();
            for n in 0..=8 {
                for e in monomials_of_degree(d, n) {
                    let p = Polynomial::monomial(&e, 1.0);
                    for j in 0..d {
                        let got = dunkl_apply_poly(j, &p, &rs).unwrap();
                        let exact = if e[j] == 0 {
                            Polynomial::zero(d)
                        } else {
                            let ej = e[j] as f64;
                            let c = ej + ks[j] * (1.0 - (-1f64).powi(e[j] as i32));
                            let mut lower = e.clone();
                            lower[j] -= 1;
                            Polynomial::monomial(&lower, c)
                        };
                        worst = worst.max(got.distance(&exact));
                        cases += 1;
                    }
                }
            }
        }
    }
    verdict(worst <= 1e-12, format!("{cases} monomial cases, largest coefficient error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let systems = [
        RootSystem::z2_power(&[0.7]).unwrap(),
        RootSystem::z2_power(&[0.5, 1.5]).unwrap(),
        RootSystem::a2(0.5).unwrap(),
        RootSystem::b2(0.5, 0.3).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut one_ok = true;
    for rs in systems {
        let d = rs.dim();
        let mut v = Intertwiner::with_max_degree(rs.clone(), 8);
        one_ok &= v.apply(&Polynomial::constant(d, 1.0)).unwrap().distance(&Polynomial::constant(d, 1.0)) < 1e-14;
        for n in 1..=8 {
            for e in monomials_of_degree(d, n) {
                let p = Polynomial::monomial(&e, 1.0);
                let vp = v.apply(&p).unwrap();
                for j in 0..d {
                    let lhs = dunkl_apply_poly(j, &vp, &rs).unwrap();
                    let rhs = v.apply(&p.partial(j)).unwrap();
                    worst = worst.max(lhs.distance(&rhs));
                }
            }
        }
    }
    verdict(worst < 1e-9 && one_ok, format!("Z₂, Z₂², A₂, B₂ to degree 8: max defect {worst:.1e}, V(1) = 1: {one_ok}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut largest = 0.0f64;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=2);
        let k: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-7.0..7.0)).collect();
        let z: Vec<Complex64> = (0..d).map(|_| Complex64::new(0.0, -rng.gen_range(-7.0..7.0))).collect();
        let v = kernel_zd(&x, &z, &k).unwrap().norm();
        largest = largest.max(v);
        if v > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("10⁴ samples, {violations} violations, largest |K| = {largest:.15}"))
}

fn criterion_5() -> Outcome {
    let mut runs = 0;
    let mut failures = Vec::new();
    for p in SYSTEM_PRESETS {
        let k = vec![0.5; p.dim];
        let t = standard(&k);
        let spec = build_system(p.name, ctx(&k)).unwrap();
        let data = default_initial_data(p.name, &t).unwrap();
        for s in 0..=2 {
            let mut o = FriedrichsOptions::new(6.0, 0.02, 0.5);
            o.s = s;
            let run = friedrichs_solve(&spec, &t, &data, &o).unwrap();
            let rep = verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE);
            runs += 1;
            if !rep.passed {
                failures.push(format!("{} s={s}", p.name));
            }
        }
    }
    verdict(failures.is_empty(), format!("{runs} ledgers over {} presets, violations in {failures:?}", SYSTEM_PRESETS.len()))
}

fn criterion_6() -> Outcome {
    let t = standard(&[0.7]);
    let u0 = grid_fn(&t, |x| (1.0 + 0.4 * x[0]) * gaussian(x));
    let u1 = grid_fn(&t, |x| 0.5 * gaussian(x));
    let state = WaveState { u: t.forward(&u0).unwrap(), ut: t.forward(&u1).unwrap() };
    let traj = solve_linear_wave(state, None, 2.0, 0.01).unwrap();
    let drift = [0.0, 1.0, 2.0].iter().map(|&s| energy_check(&traj, s).relative_drift).fold(0.0, f64::max);

    // RK4 order on Dunkl transport against the exact truncated solution e^{iξt} J_n v̂.
    let t = standard(&[0.5]);
    let spec = SymmetricSystemSpec::new(
        ctx(&[0.5]),
        vec![CoefficientField::from_rows(&[vec![0.0]]), CoefficientField::from_rows(&[vec![1.0]])],
        None,
        4.0,
    )
    .unwrap();
    let v = grid_fn(&t, gaussian);
    let (n, t_end) = (6.0, 1.0);
    let exact: SpectralField = t.forward(&v).unwrap().multiply(|xi, r2| {
        if r2 <= n * n {
            Complex64::new(0.0, xi[0] * t_end).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let errors: Vec<(f64, f64)> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&dt| {
            let run = friedrichs_solve(&spec, &t, std::slice::from_ref(&v), &FriedrichsOptions::new(n, dt, t_end)).unwrap();
            let e = run.final_state()[0].coeffs().iter().zip(exact.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            (run.dt_used, e)
        })
        .collect();
    let order = errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .fold(f64::INFINITY, f64::min);
    verdict(drift < 1e-6 && order >= 3.8, format!("energy drift {drift:.2e} on [0, 2], RK4 order {order:.3}"))
}

fn cone(half: usize, h: f64, n: f64, kind: ConeKind, centre: f64) -> dunkl::symmetric_systems::ConeReport {
    let t = build_transform(&ctx(&[0.7]), half, h, 80, n).unwrap();
    let spec =
        wave_to_system(ctx(&[0.7]), CoefficientField::from_rows(&[vec![1.0]]), FirstOrderTerms::none(), WaveSampling::new(3.0))
            .unwrap();
    let data = bump_wave_data(&t, centre, 1.0).unwrap();
    let mut solver = FriedrichsOptions::new(n, 0.01, 1.0);
    solver.outputs = 10;
    let opts = ConeOptions { kind, radius: 1.0, tol: 0.05, solver };
    propagation_experiment(&spec, &t, &data, &opts).unwrap().0
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut margins = Vec::new();
    let mut all_pass = true;
    for (half, h, n) in [(64, 0.05, 10.0), (128, 0.025, 15.0)] {
        let outer = cone(half, h, n, ConeKind::Outer, 0.0);
        let inner = cone(half, h, n, ConeKind::Inner, 2.0);
        all_pass &= outer.passed && inner.passed;
        margins.push(outer.h_margin.max(inner.h_margin));
    }
    let secs = start.elapsed().as_secs_f64();
    let shrink = margins[0] / margins[1];
    verdict(
        all_pass && shrink >= 1.5 && secs < 120.0,
        format!("both cones hold: {all_pass}, margins {:.3} → {:.3} (×{shrink:.2}) in {secs:.1} s", margins[0], margins[1]),
    )
}

fn criterion_8() -> Outcome {
    let t = standard(&[0.7]);
    let p = SemilinearProblem::new(&t, QuadraticFormQ::time_derivative_squared(1), 3.0).unwrap();
    let zero = GridFunction::zeros(t.spatial().clone());
    let u1 = grid_fn(&t, |x| 0.5 * gaussian(x));
    let theta = p.initial_state(&zero, &u1).unwrap().lambda_norm(p.sigma());
    let run = picard_solve(&p, &zero, &u1, &PicardOptions::new(p.safe_time(theta), 0.01)).unwrap();
    let h = &run.history;
    let ratio = h.contraction_ratio.unwrap_or(f64::NAN);
    let geometric = !h.ratios.is_empty() && h.ratios.iter().all(|&r| r < 1.0);
    verdict(
        h.converged && h.bound_holds && geometric && ratio <= h.predicted_ratio + 0.1 && h.predicted_ratio <= 0.5 + 1e-12,
        format!(
            "predicted 4CT‖θ‖ = {:.3}, measured ratio {ratio:.4}, {} iterations, iterates ≤ 2‖θ‖: {}",
            h.predicted_ratio, h.iterations, h.bound_holds
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let t = standard(&[0.7]);
    let p = SemilinearProblem::new(&t, QuadraticFormQ::time_derivative_squared(1), 3.0).unwrap();
    let zero = GridFunction::zeros(t.spatial().clone());
    let u1 = grid_fn(&t, |x| 2.0 * gaussian(x));
    let scales = vec![1.0, 2.0, 4.0, 8.0];
    let reports = lifespan_experiment(&p, &zero, &u1, &LifespanOptions::new(scales.clone(), 4.0, 0.01)).unwrap();
    let per_scale = start.elapsed().as_secs_f64() / scales.len() as f64;
    let uncensored: Vec<_> = reports.iter().filter(|r| !r.censored()).collect();
    let bound = uncensored.iter().all(|r| r.observed_t >= r.bound_t);
    let monotone = uncensored.windows(2).all(|w| w[1].observed_t <= w[0].observed_t);
    let blowups: Vec<_> = reports.iter().filter(|r| r.outcome == LifespanOutcome::Diverged).collect();
    let growing = blowups.iter().all(|r| r.integral_unsaturated == Some(true));
    let envelope = blowups.iter().all(|r| r.lower_envelope_ok == Some(true));
    let lifespans: Vec<String> = reports.iter().map(|r| format!("{:.3}/{:.3}", r.observed_t, r.bound_t)).collect();
    verdict(
        bound && monotone && growing && envelope && !blowups.is_empty() && per_scale < 300.0,
        format!(
            "observed/bound T {lifespans:?}, {} blow-ups, unsaturated {growing}, envelope {envelope}, {per_scale:.2} s per scale",
            blowups.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut worst_trip = 0.0f64;
    let mut worst_spread = 0.0f64;
    for d in 1..=2usize {
        for k in [0.0, 0.5, 1.0] {
            let t = standard(&vec![k; d]);
            let mut rng = ChaCha8Rng::seed_from_u64(10 + d as u64);
            let mut ratios = Vec::new();
            for _ in 0..20 {
                let f = grid_fn(&t, random_bump(&mut rng, d));
                let ff = t.forward(&f).unwrap();
                let back = t.inverse(&ff).unwrap();
                worst_trip = worst_trip.max(max_abs_diff(f.values(), back.values()) / f.max_abs());
                ratios.push(ff.l2_norm().powi(2) / f.l2_norm().powi(2));
            }
            let spread = ratios.iter().map(|r| (r / ratios[0] - 1.0).abs()).fold(0.0, f64::max);
            worst_spread = worst_spread.max(spread);
        }
    }
    verdict(
        worst_trip < 1e-6 && worst_spread < 1e-5,
        format!("round trip {worst_trip:.2e}, Plancherel ratio spread {worst_spread:.2e} over d ∈ {{1, 2}}, k ∈ {{0, 0.5, 1}}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("classical reduction", criterion_1),
        ("operator exactness", criterion_2),
        ("intertwining", criterion_3),
        ("kernel bound", criterion_4),
        ("energy estimate", criterion_5),
        ("conservation", criterion_6),
        ("finite speed of propagation", criterion_7),
        ("Picard contraction", criterion_8),
        ("lifespan scaling", criterion_9),
        ("round trip and Plancherel", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
