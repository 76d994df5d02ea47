//! Propagation speed and support cones.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::coefficients::{sample_points, spectral_norm, SymmetricSystemSpec};
use super::solver::{friedrichs_solve, FriedrichsOptions, FriedrichsRun};
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;
use crate::spectral::{cutoff_sharp, DunklTransform, KernelSeries};

fn unit_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => (0..90).map(|i| {
            let a = PI * i as f64 / 90.0;
            vec![a.cos(), a.sin()]
        })
        .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
            (0..400)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// `sup_{t, x, |ω| = 1} ‖Σ_p ω_p A_p(t, x)‖₂` over a sampling lattice of radius `probe_radius`.
pub fn estimate_c0(spec: &SymmetricSystemSpec, probe_radius: f64) -> f64 {
    let d = spec.dim();
    let principal = &spec.coefficients()[1..];
    let constant = principal.iter().all(|c| c.is_constant());
    let time_dependent = principal.iter().any(|c| c.is_time_dependent());
    let points = if constant { vec![vec![0.0; d]] } else { sample_points(d, probe_radius, if d == 1 { 25 } else { 7 }) };
    let times: &[f64] = if time_dependent { &[0.0, 0.37, 1.1] } else { &[0.0] };
    let directions = unit_directions(d);
    let mut c0 = 0.0f64;
    for &t in times {
        for x in &points {
            let mats: Vec<_> = principal.iter().map(|c| c.eval(t, x)).collect();
            for w in &directions {
                let mut sum = mats[0].clone() * w[0];
                for (m, &wp) in mats.iter().zip(w).skip(1) {
                    sum += m * wp;
                }
                c0 = c0.max(spectral_norm(&sum));
            }
        }
    }
    c0
}

/// `j_{k+1/2,1} / n`: the first zero of the reproducing kernel of `J_n` at the origin,
/// `y ↦ j_{k+1/2}(n|y|)`, which is the smearing radius of the cutoff near the origin.
///
/// The normalised Bessel function is the even part of the kernel with multiplicity `k + 1`.
pub fn resolution_radius(k: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(DunklError::InvalidArgument("truncation radius must be positive".into()));
    }
    let series = KernelSeries::new(k + 1.0)?;
    let f = |z: f64| series.eval(z, num_complex::Complex64::new(0.0, 1.0)).map(|v| v.re);
    let (mut a, mut b) = (0.0, 0.25);
    while f(b)? > 0.0 {
        a = b;
        b += 0.25;
        if b > 40.0 {
            return Err(DunklError::NonTermination { cap: 160 });
        }
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b) / n)
}

/// Which support hypothesis the data satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    /// Data vanish outside the ball of radius `R`; the support may grow at most like `R + C₀t`.
    Outer,
    /// Data vanish inside the ball of radius `R`; the solution vanishes inside `R − C₀t`.
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeOptions {
    pub kind: ConeKind,
    pub radius: f64,
    pub tol: f64,
    pub solver: FriedrichsOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeRow {
    pub t: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub inner_bound: f64,
    pub outer_bound: f64,
    pub h_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub kind: ConeKind,
    pub radius: f64,
    pub c0: f64,
    pub tol: f64,
    pub h: f64,
    /// `‖(Id − J_n)v‖_{0,k} / ‖v‖_{0,k}`.
    pub truncation_loss: f64,
    /// Spread of the initial support caused by `J_n`, in radius units.
    pub truncation_spread: f64,
    /// Main-lobe radius of the `J_n` reproducing kernel, see [`resolution_radius`].
    pub resolution: f64,
    pub h_margin: f64,
    pub rows: Vec<ConeRow>,
    /// Output indices where the relevant cone inequality fails.
    pub violations: Vec<usize>,
    pub passed: bool,
}

impl ConeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r_in,r_out,R-C0t,R+C0t,h_margin\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t, r.r_in, r.r_out, r.inner_bound, r.outer_bound, r.h_margin
            ));
        }
        out
    }
}

/// Pointwise Euclidean magnitude of a system state.
fn magnitude(u: &[GridFunction]) -> Vec<f64> {
    let n = u[0].values().len();
    (0..n).map(|i| u.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt()).collect()
}

/// `(r_in, r_out)` of the set where `|u| ≥ tol`.
///
/// `r_in` is the radius of the closest node at or above `tol` (the grid extent if there is none),
/// `r_out` the radius of the farthest one (zero if there is none).
pub fn support_radii(u: &[GridFunction], tol: f64) -> (f64, f64) {
    let grid = u[0].grid().grid();
    let mag = magnitude(u);
    let mut r_in = u[0].grid().extent() * (grid.dim() as f64).sqrt();
    let mut r_out = 0.0f64;
    for (i, &m) in mag.iter().enumerate() {
        if m >= tol {
            let r = grid.point(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            r_in = r_in.min(r);
            r_out = r_out.max(r);
        }
    }
    (r_in, r_out)
}

/// Evolves `v` and records the inner and outer support radii against the cone `R ∓ C₀t`.
///
/// The allowance is `h_margin = 2h + δ_J` with `δ_J` the larger of the main-lobe radius of `J_n`
/// and how far `J_n v` already spreads beyond (or into) the ball at threshold `tol`.
pub fn propagation_experiment(
    spec: &SymmetricSystemSpec,
    transform: &DunklTransform,
    initial: &[GridFunction],
    opts: &ConeOptions,
) -> Result<(ConeReport, FriedrichsRun)> {
    let grid = transform.spatial();
    let r = opts.radius;
    let (r_in0, r_out0) = support_radii(initial, opts.tol);
    let violated = match opts.kind {
        ConeKind::Outer => r_out0 > r,
        ConeKind::Inner => r_in0 < r,
    };
    if violated {
        return Err(DunklError::InvalidExperiment(format!(
            "initial data violate the support hypothesis at radius {r}: r_in = {r_in0}, r_out = {r_out0}"
        )));
    }
    if let Some(f) = spec.source() {
        let points = grid.grid().points();
        for i in 0..=opts.solver.outputs {
            let t = opts.solver.t_end * i as f64 / opts.solver.outputs as f64;
            for x in &points {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let inside_region = match opts.kind {
                    ConeKind::Outer => n > r,
                    ConeKind::Inner => n < r,
                };
                let mag = f(t, x).iter().map(|v| v * v).sum::<f64>().sqrt();
                if inside_region && mag >= opts.tol {
                    return Err(DunklError::InvalidExperiment(format!("source does not vanish at |x| = {n}, t = {t}")));
                }
            }
        }
    }

    let n = opts.solver.truncation;
    let mut loss_num = 0.0;
    let mut loss_den = 0.0;
    let mut projected = Vec::with_capacity(initial.len());
    for v in initial {
        let spec_v = transform.forward(v)?;
        let cut = cutoff_sharp(n, &spec_v);
        loss_num += (spec_v.l2_norm().powi(2) - cut.l2_norm().powi(2)).max(0.0);
        loss_den += spec_v.l2_norm().powi(2);
        projected.push(transform.inverse(&cut)?);
    }
    let truncation_loss = if loss_den > 0.0 { (loss_num / loss_den).sqrt() } else { 0.0 };
    let (p_in, p_out) = support_radii(&projected, opts.tol);
    let truncation_spread = match opts.kind {
        ConeKind::Outer => (p_out - r).max(0.0),
        ConeKind::Inner => (r - p_in).max(0.0),
    };
    let k_max = spec.ctx().root_system().multiplicity().iter().copied().fold(0.0, f64::max);
    let resolution = resolution_radius(k_max, n)?;
    let h = grid.spacing();
    let h_margin = 2.0 * h + truncation_spread.max(resolution);

    let run = friedrichs_solve(spec, transform, initial, &opts.solver)?;
    let c0 = run.c0;
    let mut rows = Vec::with_capacity(run.times.len());
    let mut violations = Vec::new();
    for (i, &t) in run.times.iter().enumerate() {
        let u = run.state_on_grid(transform, i)?;
        let (r_in, r_out) = support_radii(&u, opts.tol);
        let row = ConeRow { t, r_in, r_out, inner_bound: r - c0 * t, outer_bound: r + c0 * t, h_margin };
        let ok = match opts.kind {
            ConeKind::Outer => r_out <= row.outer_bound + h_margin,
            ConeKind::Inner => row.inner_bound <= 0.0 || r_in >= row.inner_bound - h_margin,
        };
        if !ok {
            violations.push(i);
        }
        rows.push(row);
    }
    let report = ConeReport {
        kind: opts.kind,
        radius: r,
        c0,
        tol: opts.tol,
        h,
        truncation_loss,
        truncation_spread,
        resolution,
        h_margin,
        passed: violations.is_empty(),
        rows,
        violations,
    };
    Ok((report, run))
}
