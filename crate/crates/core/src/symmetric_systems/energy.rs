//! System norms, the energy growth rate `λ_s`, Gronwall curves and energy ledgers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::{multi_indices_up_to, SymmetricSystemSpec};
use crate::error::{DunklError, Result};
use crate::grid::{dunkl_apply_grid, GridFunction};
use crate::spectral::{DunklTransform, SpectralField};

/// `(Σ_p Σ_{|μ|≤s} ‖T^μ u_p‖²_{L²_k})^{1/2}` with `T^μ` applied on the grid.
pub fn system_norm(u: &[GridFunction], s: usize) -> Result<f64> {
    let mut total = 0.0;
    for comp in u {
        let d = comp.grid().dim();
        for mu in multi_indices_up_to(d, s) {
            let mut f = comp.clone();
            for (j, &n) in mu.iter().enumerate() {
                for _ in 0..n {
                    f = dunkl_apply_grid(j, &f)?;
                }
            }
            total += f.l2_norm().powi(2);
        }
    }
    Ok(total.sqrt())
}

/// Spectral form of [`system_norm`]: `m_k Σ_p ∫ Σ_{|μ|≤s} ξ^{2μ} |û_p|² ω_k dξ`, square-rooted.
pub fn system_norm_spectral(t: &DunklTransform, u: &[SpectralField], s: usize) -> f64 {
    let Some(first) = u.first() else { return 0.0 };
    let weights = spectral_weights(first, s);
    let g = first.grid().grid();
    let total: f64 = u
        .iter()
        .map(|f| {
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| g.weight(i) * weights[i] * c.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    (t.inverse_constant() * total).sqrt()
}

/// `Σ_{|μ|≤s} ξ^{2μ}` at every frequency node.
pub fn spectral_weights(f: &SpectralField, s: usize) -> Vec<f64> {
    let g = f.grid().grid();
    let mis = multi_indices_up_to(g.dim(), s);
    (0..g.len())
        .map(|i| {
            let xi = g.point(i);
            mis.iter()
                .map(|mu| mu.iter().zip(&xi).map(|(&n, &x)| (x * x).powi(n as i32)).product::<f64>())
                .sum()
        })
        .collect()
}

/// Pieces of the constructive growth rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub s: usize,
    pub lambda: f64,
    /// `sup ‖A_0‖₂`.
    pub zeroth_order: f64,
    /// `½ Σ_p sup ‖∂_p A_p‖₂`, from the skew-adjointness of `T_p`.
    pub principal: f64,
    /// `C_comb · Σ_{p, 1≤r≤s} M_{p,r}`, bounding the commutators `[T^μ, A_p]`.
    pub commutator: f64,
    pub c_comb: f64,
}

/// Combinatorial constant `(3(1 + 2 k_max))^s · #{μ : |μ| ≤ s}` for `s ≥ 1`, zero for `s = 0`.
///
/// Each `T_j` hitting a product produces at most three terms (derivative of the coefficient,
/// `T_j` of the other factor, and a reflection quotient bounded by `2k_j` times a first
/// derivative of the coefficient), which gives the per-order factor; the multi-index count
/// absorbs the Cauchy–Schwarz step over `μ`.
pub fn c_comb(s: usize, dim: usize, k_max: f64) -> f64 {
    if s == 0 {
        0.0
    } else {
        (3.0 * (1.0 + 2.0 * k_max)).powi(s as i32) * multi_indices_up_to(dim, s).len() as f64
    }
}

/// `λ_s = sup‖A_0‖ + ½ Σ_p sup‖∂_p A_p‖ + C_comb Σ_{p=0}^{d} Σ_{r=1}^{s} M_{p,r}` where `M_{p,r}`
/// bounds the order-`r` derivatives of `A_p`.
pub fn estimate_lambda_s(spec: &SymmetricSystemSpec, s: usize) -> Result<LambdaEstimate> {
    let k_max = spec.ctx().root_system().multiplicity().iter().copied().fold(0.0, f64::max);
    let cc = c_comb(s, spec.dim(), k_max);
    let mut principal = 0.0;
    let mut commutator = 0.0;
    let mut zeroth_order = 0.0;
    for (p, c) in spec.coefficients().iter().enumerate() {
        let b = c.bounds().ok_or(DunklError::MissingBounds(p))?;
        if p == 0 {
            zeroth_order = b.sup;
        } else {
            principal += 0.5 * b.derivative_sup(1).ok_or(DunklError::MissingBounds(p))?;
        }
        for r in 1..=s {
            commutator += cc * b.derivative_sup(r).ok_or(DunklError::MissingBounds(p))?;
        }
    }
    Ok(LambdaEstimate { s, lambda: zeroth_order + principal + commutator, zeroth_order, principal, commutator, c_comb: cc })
}

/// Times and values of a Gronwall majorant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl GronwallCurve {
    /// Linear interpolation in time.
    pub fn at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.times.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}

/// `|g0| e^{∫_0^t a} + ∫_0^t b(s) e^{∫_s^t a} ds`, integrated as `g' = a g + b` by RK4.
pub fn gronwall_bound(g0: f64, a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64, t_end: f64, dt: f64) -> GronwallCurve {
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let rhs = |t: f64, g: f64| a(t) * g + b(t);
    let mut times = vec![0.0];
    let mut values = vec![g0.abs()];
    let mut g = g0.abs();
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, g);
        let k2 = rhs(t + 0.5 * h, g + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, g + 0.5 * h * k2);
        let k4 = rhs(t + h, g + h * k3);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        times.push((i + 1) as f64 * h);
        values.push(g);
    }
    GronwallCurve { times, values }
}

/// Norms of a trajectory next to their a-priori bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub s: usize,
    pub lambda_s: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl EnergyLedger {
    /// CSV with columns `t, norm_s, bound_s, slack`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,norm_s,bound_s,slack\n");
        for ((t, n), b) in self.times.iter().zip(&self.norms).zip(&self.bounds) {
            out.push_str(&format!("{t:.6},{n:.12e},{b:.12e},{:.12e}\n", b - n));
        }
        out
    }
}

/// Outcome of [`verify_energy_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub passed: bool,
    /// Smallest `bound − norm` over the ledger.
    pub min_slack: f64,
    /// Largest `norm / bound`.
    pub max_ratio: f64,
    pub first_violation: Option<usize>,
}

/// Default relative slack for [`verify_energy_estimate`].
pub const ENERGY_TOLERANCE: f64 = 1e-6;

/// Checks `norm_i ≤ bound_i (1 + tol)` at every ledger time.
pub fn verify_energy_estimate(ledger: &EnergyLedger, tol: f64) -> EnergyReport {
    let mut min_slack = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut first_violation = None;
    for (i, (n, b)) in ledger.norms.iter().zip(&ledger.bounds).enumerate() {
        min_slack = min_slack.min(b - n);
        if *b > 0.0 {
            max_ratio = max_ratio.max(n / b);
        } else if *n > 0.0 {
            max_ratio = f64::INFINITY;
        }
        if !(*n <= b * (1.0 + tol)) && first_violation.is_none() {
            first_violation = Some(i);
        }
    }
    if ledger.norms.is_empty() {
        min_slack = 0.0;
    }
    EnergyReport { passed: first_violation.is_none(), min_slack, max_ratio, first_violation }
}

pub(crate) fn is_finite(u: &[SpectralField]) -> bool {
    u.iter().all(|f| f.coeffs().iter().all(|c: &Complex64| c.re.is_finite() && c.im.is_finite()))
}
