use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::DunklError;
use crate::grid::GridFunction;
use crate::root_systems::{RootSystem, WeightContext};
use crate::spectral::{build_transform, DunklTransform, SpectralField};

fn ctx(k: &[f64]) -> WeightContext {
    WeightContext::new(RootSystem::z2_power(k).unwrap()).unwrap()
}

fn standard(k: &[f64]) -> DunklTransform {
    build_transform(&ctx(k), 80, 0.1, 48, 6.0).unwrap()
}

fn gaussian(x: &[f64]) -> f64 {
    (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

fn scalar(a: f64) -> CoefficientField {
    CoefficientField::from_rows(&[vec![a]])
}

fn transport(k: f64) -> SymmetricSystemSpec {
    SymmetricSystemSpec::new(ctx(&[k]), vec![scalar(0.0), scalar(1.0)], None, 4.0).unwrap()
}

fn grid_fn(t: &DunklTransform, f: impl Fn(&[f64]) -> f64) -> GridFunction {
    GridFunction::from_fn(t.spatial().clone(), f).unwrap()
}

fn max_coeff_diff(a: &[SpectralField], b: &[SpectralField]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

fn opts(n: f64, dt: f64, t_end: f64) -> FriedrichsOptions {
    FriedrichsOptions::new(n, dt, t_end)
}

/// `1 + 0.3 e^{−x²}` in one dimension.
fn bumpy_speed() -> CoefficientField {
    let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.3 * (-x[0] * x[0]).exp()));
    CoefficientField::variable(1, false, eval).with_sampled_bounds(1, 8.0, 0.0, 2, 1.2)
}

#[test]
fn zero_data_stays_zero() {
    let t = standard(&[0.7]);
    let zero: SourceFn = Arc::new(|_, _| vec![0.0]);
    let spec = SymmetricSystemSpec::new(ctx(&[0.7]), vec![scalar(0.2), bumpy_speed()], Some(zero), 4.0).unwrap();
    let run = friedrichs_solve(&spec, &t, &[GridFunction::zeros(t.spatial().clone())], &opts(6.0, 0.05, 0.5)).unwrap();
    for st in &run.states {
        assert!(st[0].max_abs() < 1e-12);
    }
    let report = verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE);
    assert!(report.passed);
}

#[test]
fn classical_transport() {
    let t = standard(&[0.0]);
    let v = grid_fn(&t, gaussian);
    let run = friedrichs_solve(&transport(0.0), &t, &[v], &opts(6.0, 0.05, 0.5)).unwrap();
    let u = &run.state_on_grid(&t, run.times.len() - 1).unwrap()[0];
    let exact = grid_fn(&t, |x| gaussian(&[x[0] + 0.5]));
    let err = u.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-4, "{err}");
    assert_eq!(run.max_truncation_defect, 0.0);
    assert!(verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE).passed);
}

#[test]
fn rk4_order_on_transport() {
    let t = standard(&[0.0]);
    let v = grid_fn(&t, gaussian);
    let v_hat = t.forward(&v).unwrap();
    let n = 6.0;
    let t_end = 1.0;
    let exact = v_hat.multiply(|xi, r2| {
        if r2 <= n * n {
            Complex64::new(0.0, xi[0] * t_end).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let runs: Vec<(f64, f64)> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&dt| {
            let run = friedrichs_solve(&transport(0.0), &t, std::slice::from_ref(&v), &opts(n, dt, t_end)).unwrap();
            (run.dt_used, max_coeff_diff(run.final_state(), std::slice::from_ref(&exact)))
        })
        .collect();
    for w in runs.windows(2) {
        let order = (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln();
        assert!(order >= 3.8, "{runs:?}");
    }
}

#[test]
fn cfl_violation_is_refused() {
    let t = standard(&[0.0]);
    let v = grid_fn(&t, gaussian);
    let err = friedrichs_solve(&transport(0.0), &t, &[v], &opts(6.0, 0.2, 1.0)).unwrap_err();
    assert!(matches!(err, DunklError::Cfl { .. }));
}

#[test]
fn coupled_system_conserves_weighted_norm() {
    let k = 0.7;
    let a1 = CoefficientField::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let spec = SymmetricSystemSpec::new(ctx(&[k]), vec![CoefficientField::zero(2), a1], None, 4.0).unwrap();
    for (half, h) in [(80, 0.1), (120, 0.0625)] {
        let t = build_transform(&ctx(&[k]), half, h, 48, 6.0).unwrap();
        let v = [grid_fn(&t, gaussian), grid_fn(&t, |x| x[0] * gaussian(x))];
        let mut o = opts(6.0, 0.01, 1.0);
        o.outputs = 5;
        let run = friedrichs_solve(&spec, &t, &v, &o).unwrap();
        let n0 = run.ledger.norms[0];
        for n in &run.ledger.norms {
            assert!((n / n0 - 1.0).abs() < 1e-6, "{:?}", run.ledger.norms);
        }
        assert!(verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE).passed);
    }
}

#[test]
fn convergence_in_truncation() {
    let t = standard(&[0.7]);
    let spec = SymmetricSystemSpec::new(ctx(&[0.7]), vec![scalar(0.0), bumpy_speed()], None, 4.0).unwrap();
    let v = grid_fn(&t, |x| (1.0 + 0.5 * x[0]) * gaussian(x));
    let finals: Vec<Vec<SpectralField>> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&n| friedrichs_solve(&spec, &t, std::slice::from_ref(&v), &opts(n, 0.02, 0.5)).unwrap().final_state().to_vec())
        .collect();
    let gaps: Vec<f64> = finals
        .windows(2)
        .map(|w| system_norm_spectral(&t, &[w[1][0].axpy(Complex64::new(-1.0, 0.0), &w[0][0])], 0))
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn superposition() {
    let t = standard(&[0.4]);
    let src: SourceFn = Arc::new(|t, x: &[f64]| vec![t * gaussian(x)]);
    let spec = SymmetricSystemSpec::new(ctx(&[0.4]), vec![scalar(-0.3), bumpy_speed()], None, 4.0).unwrap();
    let with_src = spec.clone().with_source(Some(src));
    let v1 = grid_fn(&t, gaussian);
    let v2 = grid_fn(&t, |x| x[0] * gaussian(&[x[0] - 0.3]));
    let combo = v1.zip_with(&v2, |a, b| a + 2.0 * b);
    let o = opts(5.0, 0.04, 0.4);
    let a = friedrichs_solve(&with_src, &t, &[v1], &o).unwrap();
    let b = friedrichs_solve(&spec, &t, &[v2], &o).unwrap();
    let c = friedrichs_solve(&with_src, &t, &[combo], &o).unwrap();
    let expected = a.final_state()[0].axpy(Complex64::new(2.0, 0.0), &b.final_state()[0]);
    let diff = max_coeff_diff(std::slice::from_ref(&expected), c.final_state());
    assert!(diff < 1e-8 * expected.max_abs(), "{diff}");
}

#[test]
fn variable_coefficients_respect_energy_bound() {
    let t = standard(&[0.7]);
    let spec = SymmetricSystemSpec::new(ctx(&[0.7]), vec![scalar(0.1), bumpy_speed()], None, 4.0).unwrap();
    let v = grid_fn(&t, |x| (1.0 + 0.5 * x[0]) * gaussian(x));
    for s in [0, 1] {
        let mut o = opts(6.0, 0.02, 1.0);
        o.s = s;
        let run = friedrichs_solve(&spec, &t, std::slice::from_ref(&v), &o).unwrap();
        let report = verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE);
        assert!(report.passed, "s={s} {report:?}");
        assert!(run.ledger.to_csv().lines().count() == run.times.len() + 1);
    }
}

#[test]
fn symmetry_diagnostics() {
    let good = SymmetricSystemSpec::new(
        ctx(&[0.5]),
        vec![CoefficientField::zero(2), CoefficientField::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]])],
        None,
        2.0,
    )
    .unwrap();
    assert!(check_symmetry(&good, 2.0).passed);
    let bad = SymmetricSystemSpec::new(
        ctx(&[0.5]),
        vec![CoefficientField::zero(2), CoefficientField::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]])],
        None,
        2.0,
    )
    .unwrap();
    let diag = check_symmetry(&bad, 2.0);
    assert!(!diag.passed && diag.witness.is_some());
    let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0 + (-x[0] * x[0]).exp()])));
    let diag_var = SymmetricSystemSpec::new(ctx(&[0.5]), vec![CoefficientField::zero(2), CoefficientField::variable(2, false, eval)], None, 2.0).unwrap();
    assert!(check_symmetry(&diag_var, 2.0).passed);
    let t = standard(&[0.5]);
    let v = vec![grid_fn(&t, gaussian); 2];
    assert!(matches!(friedrichs_solve(&bad, &t, &v, &opts(4.0, 0.05, 0.1)), Err(DunklError::NotSymmetric(_))));
}

#[test]
fn non_invariant_coefficients_are_rejected() {
    let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.1 * x[0]));
    let err = SymmetricSystemSpec::new(ctx(&[0.5]), vec![scalar(0.0), CoefficientField::variable(1, false, eval)], None, 2.0)
        .unwrap_err();
    assert!(matches!(err, DunklError::NotInvariant(_)));
}

#[test]
fn missing_bounds_are_reported() {
    let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, 1.0 + x[0] * x[0]));
    let spec = SymmetricSystemSpec::new(ctx(&[0.5]), vec![scalar(0.0), CoefficientField::variable(1, false, eval)], None, 2.0)
        .unwrap();
    assert!(matches!(estimate_lambda_s(&spec, 0), Err(DunklError::MissingBounds(1))));
}

#[test]
fn lambda_for_constant_coefficients() {
    let spec = SymmetricSystemSpec::new(ctx(&[0.5]), vec![scalar(0.0), scalar(1.0)], None, 2.0).unwrap();
    for s in 0..3 {
        assert_eq!(estimate_lambda_s(&spec, s).unwrap().lambda, 0.0);
    }
    let damped = SymmetricSystemSpec::new(ctx(&[0.5]), vec![scalar(-0.7), scalar(1.0)], None, 2.0).unwrap();
    assert_eq!(estimate_lambda_s(&damped, 2).unwrap().lambda, 0.7);
}

#[test]
fn grid_and_spectral_norms_agree() {
    let k = 0.7;
    let t = build_transform(&ctx(&[k]), 160, 0.05, 48, 6.0).unwrap();
    let u = [grid_fn(&t, gaussian), grid_fn(&t, |x| x[0] * gaussian(&[x[0] - 0.2]))];
    for s in [0, 1] {
        let fd = system_norm(&u, s).unwrap();
        let sp: Vec<SpectralField> = u.iter().map(|f| t.forward(f).unwrap()).collect();
        let spectral = system_norm_spectral(&t, &sp, s);
        assert!((fd / spectral - 1.0).abs() < 1e-5, "s={s} {fd} {spectral}");
    }
    assert_eq!(system_norm(&[GridFunction::zeros(t.spatial().clone())], 1).unwrap(), 0.0);
}

#[test]
fn gronwall_cases() {
    let c = gronwall_bound(2.0, |_| 0.0, |_| 0.0, 1.0, 0.01);
    assert!(c.values.iter().all(|v| *v == 2.0));
    let c = gronwall_bound(1.5, |_| 0.8, |_| 0.0, 2.0, 0.001);
    assert!((c.at(2.0) - 1.5 * 1.6f64.exp()).abs() < 1e-10);
    let c = gronwall_bound(1.0, |_| 0.0, |_| 1.0, 3.0, 0.1);
    assert!((c.at(3.0) - 4.0).abs() < 1e-12);
    assert!((c.at(1.05) - 2.05).abs() < 1e-12);
}

#[test]
fn ledger_negative_control() {
    let ledger = EnergyLedger {
        s: 0,
        lambda_s: 0.1,
        times: vec![0.0, 0.5, 1.0],
        norms: vec![1.0, 1.2, 1.0],
        bounds: vec![1.0, 1.05, 1.1],
    };
    let r = verify_energy_estimate(&ledger, ENERGY_TOLERANCE);
    assert!(!r.passed);
    assert_eq!(r.first_violation, Some(1));
    assert!(r.min_slack < 0.0);
    let zero = EnergyLedger { norms: vec![0.0; 3], bounds: vec![0.0; 3], ..ledger };
    assert!(verify_energy_estimate(&zero, ENERGY_TOLERANCE).passed);
}

#[test]
fn matrix_square_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=4 {
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(d, d) * 0.5;
        let b = matrix_sqrt(&a).unwrap();
        assert!((&b * &b - &a).amax() < 1e-12);
        assert!((&b - b.transpose()).amax() == 0.0);
    }
    let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.1]);
    assert!(matches!(matrix_sqrt(&indefinite), Err(DunklError::Ellipticity(_))));
}

#[test]
fn wave_reduction_checks_ellipticity() {
    let a = CoefficientField::from_rows(&[vec![1.0, 0.0], vec![0.0, -0.5]]);
    let err = wave_to_system(ctx(&[0.3, 0.3]), a, FirstOrderTerms::none(), WaveSampling::new(2.0)).unwrap_err();
    assert!(matches!(err, DunklError::Ellipticity(_)));
}

#[test]
fn propagation_speed_of_reductions() {
    for k in [vec![0.7], vec![0.5, 0.2]] {
        let d = k.len();
        let free = wave_to_system(ctx(&k), CoefficientField::constant(DMatrix::identity(d, d)), FirstOrderTerms::none(), WaveSampling::new(2.0)).unwrap();
        assert!(check_symmetry(&free, 2.0).passed);
        assert!((estimate_c0(&free, 2.0) - 1.0).abs() < 1e-12);
        let fast = wave_to_system(ctx(&k), CoefficientField::constant(DMatrix::identity(d, d) * 4.0), FirstOrderTerms::none(), WaveSampling::new(2.0)).unwrap();
        assert!((estimate_c0(&fast, 2.0) - 2.0).abs() < 1e-12);
    }
    let c = SymmetricSystemSpec::new(ctx(&[0.3]), vec![scalar(0.0), scalar(-2.5)], None, 2.0).unwrap();
    assert_eq!(estimate_c0(&c, 2.0), 2.5);
    let none = SymmetricSystemSpec::new(ctx(&[0.3]), vec![scalar(1.0), scalar(0.0)], None, 2.0).unwrap();
    assert_eq!(estimate_c0(&none, 2.0), 0.0);
}

#[test]
fn free_wave_matches_spectral_solution() {
    let k = 0.7;
    let t = standard(&[k]);
    let spec = wave_to_system(ctx(&[k]), CoefficientField::constant(DMatrix::identity(1, 1)), FirstOrderTerms::none(), WaveSampling::new(4.0)).unwrap();
    let u0 = grid_fn(&t, |x| (1.0 + 0.4 * x[0]) * gaussian(x));
    let u0_hat = t.forward(&u0).unwrap();
    let w0 = t.inverse(&crate::spectral::spectral_derivative(0, &u0_hat)).unwrap();
    let v = [u0, GridFunction::zeros(t.spatial().clone()), w0];
    let t_end = 1.0;
    let run = friedrichs_solve(&spec, &t, &v, &opts(6.0, 0.02, t_end)).unwrap();
    let fin = run.final_state();
    let exact = u0_hat.multiply(|_, r2| Complex64::new((r2.sqrt() * t_end).cos(), 0.0));
    assert!(max_coeff_diff(&fin[..1], &[exact]) < 1e-5);
    let du = crate::spectral::spectral_derivative(0, &fin[0]);
    assert!(max_coeff_diff(&fin[2..3], &[du]) < 1e-5);
    assert!(verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE).passed);
}

#[test]
fn variable_wave_keeps_constraint_and_energy() {
    let k = 0.5;
    let t = standard(&[k]);
    let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, 1.0 + 0.5 * (-0.25 * x[0] * x[0]).exp()));
    let a = CoefficientField::variable(1, false, eval);
    let spec = wave_to_system(ctx(&[k]), a, FirstOrderTerms::damping(0.2), WaveSampling::new(8.0)).unwrap();
    assert!(check_symmetry(&spec, 4.0).passed);
    let u0 = grid_fn(&t, gaussian);
    let b = grid_fn(&t, |x| (1.0 + 0.5 * (-0.25 * x[0] * x[0]).exp()).sqrt());
    let tu = t.inverse(&crate::spectral::spectral_derivative(0, &t.forward(&u0).unwrap())).unwrap();
    let w0 = b.zip_with(&tu, |p, q| p * q);
    let run = friedrichs_solve(&spec, &t, &[u0, GridFunction::zeros(t.spatial().clone()), w0], &opts(6.0, 0.02, 1.0)).unwrap();
    assert!(verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE).passed);
    // w − B T u is conserved by the exact flow; the discrete drift is measured against its initial
    // value, which reflects the band limit of J_n.
    let gap = |i: usize| {
        let st = run.state_on_grid(&t, i).unwrap();
        let tu = t.inverse(&crate::spectral::spectral_derivative(0, &run.states[i][0])).unwrap();
        st[2].zip_with(&b.zip_with(&tu, |p, q| p * q), |p, q| p - q).max_abs()
    };
    let (g0, g1) = (gap(0), gap(run.times.len() - 1));
    assert!(g1 < 2.0 * g0 + 1e-5, "{g0} {g1}");
}

fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

fn free_wave(k: f64) -> SymmetricSystemSpec {
    wave_to_system(ctx(&[k]), CoefficientField::constant(DMatrix::identity(1, 1)), FirstOrderTerms::none(), WaveSampling::new(3.0))
        .unwrap()
}

/// Free wave with `u(0) = 0`, `∂_t u(0) = bump((|x| − c)/w)`.
fn cone_run(k: f64, half: usize, h: f64, n: f64, kind: ConeKind, c: f64, w: f64) -> ConeReport {
    let t = build_transform(&ctx(&[k]), half, h, 80, n).unwrap();
    let zero = GridFunction::zeros(t.spatial().clone());
    let v = [zero.clone(), grid_fn(&t, |x| bump((x[0].abs() - c) / w)), zero];
    let mut o = FriedrichsOptions::new(n, 0.01, 1.0);
    o.outputs = 10;
    let opts = ConeOptions { kind, radius: 1.0, tol: 0.05, solver: o };
    propagation_experiment(&free_wave(k), &t, &v, &opts).unwrap().0
}

#[test]
fn resolution_radius_matches_sinc_zero() {
    assert!((resolution_radius(0.0, 2.0).unwrap() - std::f64::consts::PI / 2.0).abs() < 1e-12);
    // j_{3/2}(z) vanishes where tan z = z
    assert!((resolution_radius(1.0, 1.0).unwrap() - 4.493_409_457_909_064).abs() < 1e-10);
}

#[test]
fn trivial_cone_for_zero_data() {
    let t = build_transform(&ctx(&[0.7]), 64, 0.05, 80, 10.0).unwrap();
    let zero = GridFunction::zeros(t.spatial().clone());
    let mut o = FriedrichsOptions::new(10.0, 0.02, 0.5);
    o.outputs = 5;
    let opts = ConeOptions { kind: ConeKind::Outer, radius: 1.0, tol: 1e-3, solver: o };
    let (rep, _) = propagation_experiment(&free_wave(0.7), &t, &[zero.clone(), zero.clone(), zero], &opts).unwrap();
    assert!(rep.passed);
    assert!(rep.rows.iter().all(|r| r.r_out == 0.0));
}

#[test]
fn classical_cone() {
    let rep = cone_run(0.0, 128, 0.025, 15.0, ConeKind::Outer, 0.0, 1.0);
    assert_eq!(rep.c0, 1.0);
    assert!(rep.passed, "{}", rep.to_csv());
    // the front moves: the cone is not trivially satisfied
    let last = rep.rows.last().unwrap();
    assert!(last.r_out > 1.5);
}

#[test]
fn dunkl_cones_at_two_resolutions() {
    let mut margins = Vec::new();
    for (half, h, n) in [(64, 0.05, 10.0), (128, 0.025, 15.0)] {
        let outer = cone_run(0.7, half, h, n, ConeKind::Outer, 0.0, 1.0);
        assert!(outer.passed, "{}", outer.to_csv());
        let inner = cone_run(0.7, half, h, n, ConeKind::Inner, 2.0, 1.0);
        assert!(inner.passed, "{}", inner.to_csv());
        assert!(inner.rows[3].r_in > 0.5, "{}", inner.to_csv());
        margins.push(outer.h_margin.max(inner.h_margin));
    }
    assert!(margins[0] >= 1.5 * margins[1], "{margins:?}");
}

#[test]
fn support_hypothesis_is_checked() {
    let t = build_transform(&ctx(&[0.7]), 64, 0.05, 80, 10.0).unwrap();
    let zero = GridFunction::zeros(t.spatial().clone());
    let v = [zero.clone(), grid_fn(&t, |x| bump(x[0] / 1.5)), zero];
    let opts = ConeOptions { kind: ConeKind::Outer, radius: 1.0, tol: 0.05, solver: FriedrichsOptions::new(10.0, 0.02, 0.2) };
    let err = propagation_experiment(&free_wave(0.7), &t, &v, &opts).unwrap_err();
    assert!(matches!(err, DunklError::InvalidExperiment(_)));
}

#[test]
fn presets_pass_their_ledgers() {
    for p in SYSTEM_PRESETS {
        let k: Vec<f64> = vec![0.5; p.dim];
        let t = standard(&k);
        let spec = build_system(p.name, ctx(&k)).unwrap();
        assert_eq!(spec.components(), p.components);
        let data = default_initial_data(p.name, &t).unwrap();
        for s in 0..=2 {
            let mut o = opts(6.0, 0.02, 0.5);
            o.s = s;
            let run = friedrichs_solve(&spec, &t, &data, &o).unwrap();
            let rep = verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE);
            assert!(rep.passed, "{} s={s}: {rep:?}", p.name);
        }
    }
    assert!(build_system("nope", ctx(&[0.5])).is_err());
    assert!(build_system("transport-2d", ctx(&[0.5])).is_err());
}
