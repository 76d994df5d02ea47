//! Friedrichs spectral truncation: `du_n/dt = Σ J_n(A_p T_p J_n u_n) + J_n(A_0 J_n u_n) + J_n f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::SymmetricSystemSpec;
use super::energy::{
    estimate_lambda_s, gronwall_bound, is_finite, system_norm_spectral, EnergyLedger, LambdaEstimate,
};
use super::propagation::estimate_c0;
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;
use crate::spectral::{DunklTransform, SpectralField};

/// Default Courant factor in `dt_max = c / (C₀ n + ‖A_0‖)`.
pub const DEFAULT_CFL: f64 = 0.5;

/// Magnitude treated as overflow.
const DIVERGENCE_LIMIT: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsOptions {
    /// Truncation radius `n` of `J_n`.
    pub truncation: f64,
    /// Requested time step; the step used divides the output interval evenly and never exceeds it.
    pub dt: f64,
    pub t_end: f64,
    /// Number of output intervals on `[0, t_end]`.
    pub outputs: usize,
    /// Sobolev index of the ledger norm.
    pub s: usize,
    pub cfl: f64,
}

impl FriedrichsOptions {
    pub fn new(truncation: f64, dt: f64, t_end: f64) -> Self {
        Self { truncation, dt, t_end, outputs: 10, s: 0, cfl: DEFAULT_CFL }
    }
}

/// Output of [`friedrichs_solve`].
#[derive(Debug, Clone)]
pub struct FriedrichsRun {
    pub times: Vec<f64>,
    pub states: Vec<Vec<SpectralField>>,
    pub ledger: EnergyLedger,
    pub lambda: LambdaEstimate,
    pub c0: f64,
    pub dt_used: f64,
    pub dt_max: f64,
    pub steps: usize,
    /// Largest `‖(Id − J_n) u_n‖ / ‖u_n‖` over all accepted steps.
    pub max_truncation_defect: f64,
}

impl FriedrichsRun {
    /// Output state `i` sampled on the spatial grid.
    pub fn state_on_grid(&self, t: &DunklTransform, i: usize) -> Result<Vec<GridFunction>> {
        self.states[i].iter().map(|f| t.inverse(f)).collect()
    }

    pub fn final_state(&self) -> &[SpectralField] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

enum Coefficient {
    Zero,
    Constant(Vec<f64>),
    Cached(Vec<f64>),
    Live(usize),
}

struct Generator<'a> {
    spec: &'a SymmetricSystemSpec,
    transform: &'a DunklTransform,
    mask: Vec<bool>,
    xi: Vec<Vec<f64>>,
    coeffs: Vec<Coefficient>,
    points: Vec<Vec<f64>>,
    m: usize,
}

impl<'a> Generator<'a> {
    fn new(spec: &'a SymmetricSystemSpec, transform: &'a DunklTransform, n: f64) -> Self {
        let fg = transform.frequency();
        let mask = fg.norms_sq().iter().map(|&r2| n > 0.0 && r2 <= n * n).collect();
        let d = spec.dim();
        let xi = (0..d).map(|p| (0..fg.len()).map(|i| fg.grid().point(i)[p]).collect()).collect();
        let points = transform.spatial().grid().points();
        let m = spec.components();
        let coeffs = spec
            .coefficients()
            .iter()
            .enumerate()
            .map(|(p, c)| {
                if let Some(a) = c.constant_value() {
                    if a.iter().all(|v| *v == 0.0) {
                        Coefficient::Zero
                    } else {
                        Coefficient::Constant(row_major(a))
                    }
                } else if c.is_time_dependent() {
                    Coefficient::Live(p)
                } else {
                    Coefficient::Cached(points.iter().flat_map(|x| row_major(&c.eval(0.0, x))).collect())
                }
            })
            .collect();
        Self { spec, transform, mask, xi, coeffs, points, m }
    }

    fn largest_retained(&self) -> f64 {
        let fg = self.transform.frequency();
        fg.norms_sq()
            .iter()
            .zip(&self.mask)
            .filter(|(_, &keep)| keep)
            .fold(0.0f64, |m, (r2, _)| m.max(r2.sqrt()))
    }

    fn project(&self, u: &mut [Vec<Complex64>]) {
        for comp in u {
            for (c, &keep) in comp.iter_mut().zip(&self.mask) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    fn source(&self, t: f64) -> Option<Vec<Vec<Complex64>>> {
        let f = self.spec.source()?;
        let vals: Vec<Vec<f64>> = self.points.iter().map(|x| f(t, x)).collect();
        Some(
            (0..self.m)
                .map(|i| {
                    let data: Vec<Complex64> = vals.iter().map(|v| Complex64::new(v[i], 0.0)).collect();
                    self.transform.forward_complex(&data)
                })
                .collect(),
        )
    }

    /// Adds `A · w` to `out`, where `w` holds spectral coefficients and `A` multiplies pointwise.
    fn accumulate(&self, p: usize, t: f64, w: &[Vec<Complex64>], out: &mut [Vec<Complex64>]) {
        let m = self.m;
        match &self.coeffs[p] {
            Coefficient::Zero => {}
            Coefficient::Constant(a) => {
                for i in 0..m {
                    for j in 0..m {
                        let aij = a[i * m + j];
                        if aij != 0.0 {
                            for (o, v) in out[i].iter_mut().zip(&w[j]) {
                                *o += v * aij;
                            }
                        }
                    }
                }
            }
            Coefficient::Cached(_) | Coefficient::Live(_) => {
                let grid_vals: Vec<Vec<Complex64>> = w
                    .iter()
                    .map(|c| {
                        let f = SpectralField::new(self.transform.frequency().clone(), c.clone())
                            .expect("finite coefficients");
                        self.transform.inverse_complex(&f)
                    })
                    .collect();
                let live;
                let a: &[f64] = match &self.coeffs[p] {
                    Coefficient::Cached(a) => a,
                    Coefficient::Live(idx) => {
                        let c = &self.spec.coefficients()[*idx];
                        live = self.points.iter().flat_map(|x| row_major(&c.eval(t, x))).collect::<Vec<f64>>();
                        &live
                    }
                    _ => unreachable!(),
                };
                for i in 0..m {
                    let prod: Vec<Complex64> = (0..self.points.len())
                        .map(|x| (0..m).map(|j| grid_vals[j][x] * a[x * m * m + i * m + j]).sum())
                        .collect();
                    for (o, v) in out[i].iter_mut().zip(self.transform.forward_complex(&prod)) {
                        *o += v;
                    }
                }
            }
        }
    }

    fn apply(&self, t: f64, u: &[Vec<Complex64>], src: Option<&Vec<Vec<Complex64>>>) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = match src {
            Some(f) => f.clone(),
            None => vec![vec![Complex64::new(0.0, 0.0); u[0].len()]; self.m],
        };
        for p in 1..=self.spec.dim() {
            if matches!(self.coeffs[p], Coefficient::Zero) {
                continue;
            }
            let deriv: Vec<Vec<Complex64>> =
                u.iter().map(|c| c.iter().zip(&self.xi[p - 1]).map(|(v, &x)| v * Complex64::new(0.0, x)).collect()).collect();
            self.accumulate(p, t, &deriv, &mut out);
        }
        self.accumulate(0, t, u, &mut out);
        self.project(&mut out);
        out
    }
}

fn row_major(a: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let (r, c) = a.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| a[(i, j)])).collect()
}

fn axpy(u: &[Vec<Complex64>], h: f64, k: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    u.iter().zip(k).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * h).collect()).collect()
}

/// Evolves the truncated system from `J_n v` with classical RK4 and fills the energy ledger.
pub fn friedrichs_solve(
    spec: &SymmetricSystemSpec,
    transform: &DunklTransform,
    initial: &[GridFunction],
    opts: &FriedrichsOptions,
) -> Result<FriedrichsRun> {
    let m = spec.components();
    if initial.len() != m {
        return Err(DunklError::InvalidArgument(format!("{} initial components for an {m}-component system", initial.len())));
    }
    if !(opts.t_end > 0.0) || !(opts.dt > 0.0) || opts.outputs == 0 {
        return Err(DunklError::InvalidArgument("t_end, dt and outputs must be positive".into()));
    }
    let sym = super::coefficients::check_symmetry(spec, transform.spatial().extent());
    if !sym.passed {
        return Err(DunklError::NotSymmetric(sym.max_asymmetry.iter().copied().fold(0.0, f64::max)));
    }
    let lambda = estimate_lambda_s(spec, opts.s)?;
    let gen = Generator::new(spec, transform, opts.truncation);
    let c0 = estimate_c0(spec, transform.spatial().extent());
    let a0 = spec.coefficients()[0].bounds().map(|b| b.sup).unwrap_or(0.0);
    let rate = c0 * gen.largest_retained() + a0;
    let dt_max = if rate > 0.0 { opts.cfl / rate } else { f64::INFINITY };
    if opts.dt > dt_max {
        return Err(DunklError::Cfl { dt: opts.dt, dt_max });
    }
    let interval = opts.t_end / opts.outputs as f64;
    let per_output = ((interval / opts.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = interval / per_output as f64;
    let steps = per_output * opts.outputs;

    let mut u: Vec<Vec<Complex64>> = initial.iter().map(|f| transform.forward(f).map(|s| s.coeffs().to_vec())).collect::<Result<_>>()?;
    gen.project(&mut u);
    let fgrid = transform.frequency().clone();
    let wrap = |u: &[Vec<Complex64>]| -> Vec<SpectralField> {
        u.iter().map(|c| SpectralField::new(fgrid.clone(), c.clone()).expect("finite state")).collect()
    };
    let mut times = vec![0.0];
    let mut states = vec![wrap(&u)];
    let mut max_defect = 0.0f64;
    for step in 0..steps {
        let t = step as f64 * h;
        let (s0, s1, s2) = (gen.source(t), gen.source(t + 0.5 * h), gen.source(t + h));
        let k1 = gen.apply(t, &u, s0.as_ref());
        let k2 = gen.apply(t + 0.5 * h, &axpy(&u, 0.5 * h, &k1), s1.as_ref());
        let k3 = gen.apply(t + 0.5 * h, &axpy(&u, 0.5 * h, &k2), s1.as_ref());
        let k4 = gen.apply(t + h, &axpy(&u, h, &k3), s2.as_ref());
        for i in 0..m {
            for (idx, v) in u[i].iter_mut().enumerate() {
                *v += (k1[i][idx] + k2[i][idx] * 2.0 + k3[i][idx] * 2.0 + k4[i][idx]) * (h / 6.0);
            }
        }
        let mut inside = 0.0f64;
        let mut outside = 0.0f64;
        let mut finite = true;
        for comp in &u {
            for (c, &keep) in comp.iter().zip(&gen.mask) {
                let a = c.norm();
                finite &= a.is_finite() && a < DIVERGENCE_LIMIT;
                if keep {
                    inside = inside.max(a);
                } else {
                    outside = outside.max(a);
                }
            }
        }
        if !finite {
            return Err(DunklError::Divergence { t: t + h });
        }
        if inside > 0.0 {
            max_defect = max_defect.max(outside / inside);
        }
        if (step + 1) % per_output == 0 {
            times.push((step + 1) as f64 * h);
            states.push(wrap(&u));
        }
    }
    debug_assert!(states.iter().all(|s| is_finite(s)));

    let norms: Vec<f64> = states.iter().map(|s| system_norm_spectral(transform, s, opts.s)).collect();
    let source_norm = |t: f64| -> f64 {
        match gen.source(t) {
            None => 0.0,
            Some(f) => system_norm_spectral(transform, &wrap(&f), opts.s),
        }
    };
    let curve = if spec.source().is_some() {
        gronwall_bound(norms[0], |_| lambda.lambda, source_norm, opts.t_end, h)
    } else {
        gronwall_bound(norms[0], |_| lambda.lambda, |_| 0.0, opts.t_end, h)
    };
    let bounds = times.iter().map(|&t| curve.at(t)).collect();
    let ledger = EnergyLedger { s: opts.s, lambda_s: lambda.lambda, times: times.clone(), norms, bounds };
    Ok(FriedrichsRun {
        times,
        states,
        ledger,
        lambda,
        c0,
        dt_used: h,
        dt_max,
        steps,
        max_truncation_defect: max_defect,
    })
}

/// `J_n` applied to spectral data given as fields.
pub fn truncate(fields: &[SpectralField], n: f64) -> Vec<SpectralField> {
    fields.iter().map(|f| crate::spectral::cutoff_sharp(n, f)).collect()
}
