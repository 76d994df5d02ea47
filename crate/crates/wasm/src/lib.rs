//! Browser bindings: kernel curves, free Dunkl waves and propagation cones.
//!
//! Each export wraps a plain function of the same name with a `_values` suffix that returns
//! `Result<Vec<f64>, String>`, so everything can be tested off the browser.

use dunkl::grid::GridFunction;
use dunkl::root_systems::{RootSystem, WeightContext};
use dunkl::semilinear_wave::{solve_linear_wave, WaveState};
use dunkl::spectral::{build_transform, DunklTransform, KernelSeries};
use dunkl::symmetric_systems::{
    bump_wave_data, propagation_experiment, wave_to_system, CoefficientField, ConeKind, ConeOptions,
    FirstOrderTerms, FriedrichsOptions, WaveSampling,
};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

/// Largest multiplicity the demo accepts.
pub const MAX_K: f64 = 5.0;

fn check_k(k: f64) -> Result<(), String> {
    if (0.0..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(format!("k must lie in [0, {MAX_K}], got {k}"))
    }
}

fn transform(k: f64, half: usize, h: f64, freq_half: usize, xi: f64) -> Result<DunklTransform, String> {
    check_k(k)?;
    let ctx = WeightContext::new(RootSystem::z2_power(&[k]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    build_transform(&ctx, half, h, freq_half, xi).map_err(|e| e.to_string())
}

/// `[x_0, Re E, Im E, x_1, …]` for `E(x) = K(x, iy)` on `n` points of `[−x_max, x_max]`.
pub fn kernel_curve_values(k: f64, y: f64, x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    check_k(k)?;
    if n < 2 || x_max.is_nan() || x_max <= 0.0 {
        return Err("need n ≥ 2 and x_max > 0".into());
    }
    let series = KernelSeries::new(k).map_err(|e| e.to_string())?;
    let z = Complex64::new(0.0, y);
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let x = -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64;
        let e = series.eval(x, z).map_err(|e| e.to_string())?;
        out.extend([x, e.re, e.im]);
    }
    Ok(out)
}

/// `[x_0, u_0, x_1, u_1, …]` for the free wave from `u = e^{−(x−c)²/2}`, `∂_t u = 0` at time `t`.
pub fn free_wave_values(k: f64, centre: f64, t: f64) -> Result<Vec<f64>, String> {
    if !(0.0..=20.0).contains(&t) || !(-4.0..=4.0).contains(&centre) {
        return Err("need 0 ≤ t ≤ 20 and |centre| ≤ 4".into());
    }
    let tr = transform(k, 80, 0.1, 48, 6.0)?;
    let grid = tr.spatial().clone();
    let u0 = GridFunction::from_fn(grid.clone(), |x| (-0.5 * (x[0] - centre).powi(2)).exp()).map_err(|e| e.to_string())?;
    let forward = |f: &GridFunction| tr.forward(f).map_err(|e| e.to_string());
    let state = WaveState { u: forward(&u0)?, ut: forward(&GridFunction::zeros(grid.clone()))? };
    // The propagator is exact per mode, so one step suffices.
    let traj = solve_linear_wave(state, None, t, t.max(1e-3)).map_err(|e| e.to_string())?;
    let u = tr.inverse(&traj.final_state().u).map_err(|e| e.to_string())?;
    let points = grid.grid().points();
    Ok(points.iter().zip(u.values()).flat_map(|(x, v)| [x[0], *v]).collect())
}

/// `[t, r_out, R + C₀t, …]` for the free wave from a bump of radius one.
pub fn cone_radii_values(k: f64, t_end: f64) -> Result<Vec<f64>, String> {
    if !(t_end > 0.0 && t_end <= 1.5) {
        return Err("need 0 < t_end ≤ 1.5".into());
    }
    let tr = transform(k, 64, 0.05, 80, 10.0)?;
    let ctx = tr.spatial().ctx().clone();
    let spec = wave_to_system(
        ctx,
        CoefficientField::from_rows(&[vec![1.0]]),
        FirstOrderTerms::none(),
        WaveSampling::new(tr.spatial().extent()),
    )
    .map_err(|e| e.to_string())?;
    let data = bump_wave_data(&tr, 0.0, 1.0).map_err(|e| e.to_string())?;
    let mut solver = FriedrichsOptions::new(10.0, 0.01, t_end);
    solver.outputs = 10;
    let opts = ConeOptions { kind: ConeKind::Outer, radius: 1.0, tol: 0.05, solver };
    let (report, _) = propagation_experiment(&spec, &tr, &data, &opts).map_err(|e| e.to_string())?;
    Ok(report.rows.iter().flat_map(|r| [r.t, r.r_out, r.outer_bound]).collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn kernel_curve(k: f64, y: f64, x_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(kernel_curve_values(k, y, x_max, n))
}

#[wasm_bindgen]
pub fn free_wave(k: f64, centre: f64, t: f64) -> Result<Vec<f64>, JsError> {
    js(free_wave_values(k, centre, t))
}

#[wasm_bindgen]
pub fn cone_radii(k: f64, t_end: f64) -> Result<Vec<f64>, JsError> {
    js(cone_radii_values(k, t_end))
}
