//! The quadratic nonlinearity and the field `Λ_k u = (∂_t u, T_1 u, …, T_d u)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::grid::{dunkl_apply_grid, GridFunction};
use crate::spectral::{sobolev_norm, spectral_derivative, DunklTransform, SpectralField};

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// `Q(v) = vᵀ q v` on `ℝ^{d+1}`, with `v = (∂_t u, T_1 u, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormQ {
    q: Vec<Vec<f64>>,
}

impl QuadraticFormQ {
    #[allow(clippy::needless_range_loop)]
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        if n < 2 || q.iter().any(|r| r.len() != n) {
            return Err(DunklError::InvalidArgument("q must be a square matrix of size d + 1 ≥ 2".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if !q[i][j].is_finite() {
                    return Err(DunklError::InvalidArgument("q has non-finite entries".into()));
                }
                if (q[i][j] - q[j][i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(DunklError::NotSymmetric((q[i][j] - q[j][i]).abs()));
                }
            }
        }
        Ok(Self { q })
    }

    pub fn zero(dim: usize) -> Self {
        Self { q: vec![vec![0.0; dim + 1]; dim + 1] }
    }

    /// `Q(v) = (∂_t u)²`.
    pub fn time_derivative_squared(dim: usize) -> Self {
        let mut q = Self::zero(dim);
        q.q[0][0] = 1.0;
        q
    }

    /// `Q(v) = Σ_j (T_j u)²`.
    pub fn gradient_squared(dim: usize) -> Self {
        let mut q = Self::zero(dim);
        for j in 1..=dim {
            q.q[j][j] = 1.0;
        }
        q
    }

    /// `Q(v) = (∂_t u)² − Σ_j (T_j u)²`, the null form.
    pub fn null_form(dim: usize) -> Self {
        let mut q = Self::gradient_squared(dim);
        for j in 1..=dim {
            q.q[j][j] = -1.0;
        }
        q.q[0][0] = 1.0;
        q
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { q: self.q.iter().map(|r| r.iter().map(|v| c * v).collect()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.q.len() - 1
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().flatten().all(|&v| v == 0.0)
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.bilinear(v, v)
    }

    /// `Q(v, w) = vᵀ q w`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.q.iter().zip(v).map(|(row, vi)| vi * row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()).sum()
    }

    /// Spectral norm of the entrywise absolute value of `q`, the factor in
    /// `‖Q(Λu, Λu)‖ ≤ C_alg ‖|q|‖₂ ‖Λu‖²`.
    pub fn abs_norm(&self) -> f64 {
        let n = self.q.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.q[i][j].abs());
        SymmetricEigen::new(m).eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Whether `Q` only couples `∂_t u` with itself and each `T_j u` with itself, so that
    /// `Q(Λu, Λu)` is even in every coordinate whenever `u` is.
    pub fn preserves_parity(&self) -> bool {
        let n = self.q.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.q[i][j] == 0.0))
    }
}

/// `(∂_t u, T_1 u, …, T_d u)` sampled on the spatial grid.
#[derive(Debug, Clone)]
pub struct LambdaField {
    pub components: Vec<GridFunction>,
}

impl LambdaField {
    /// `(Σ_a ‖Λ_a‖²_{H^σ_k})^{1/2}` through the transform.
    pub fn norm_s(&self, transform: &DunklTransform, sigma: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in &self.components {
            total += sobolev_norm(&transform.forward(c)?, sigma).powi(2);
        }
        Ok(total.sqrt())
    }

    /// `‖∂_t u‖_∞ + Σ_j ‖T_j u‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).sum()
    }
}

/// Assembles `Λ_k u` with the grid Dunkl operators.
pub fn lambda_field(u: &GridFunction, u_t: &GridFunction) -> Result<LambdaField> {
    if u.values().len() != u_t.values().len() {
        return Err(DunklError::InvalidArgument("u and u_t live on different grids".into()));
    }
    let mut components = vec![u_t.clone()];
    for j in 0..u.grid().dim() {
        components.push(dunkl_apply_grid(j, u)?);
    }
    Ok(LambdaField { components })
}

/// `Λ_k u` in frequency: `(v̂, iξ_1 û, …, iξ_d û)`.
pub(crate) fn lambda_spectral(u: &SpectralField, ut: &SpectralField) -> Vec<SpectralField> {
    let mut out = vec![ut.clone()];
    for j in 0..u.grid().dim() {
        out.push(spectral_derivative(j, u));
    }
    out
}

/// `‖Λ_k u‖_{σ}` computed from the spectral state.
pub fn lambda_norm_spectral(u: &SpectralField, ut: &SpectralField, sigma: f64) -> f64 {
    let mults: Vec<f64> = u.grid().norms_sq().iter().map(|r2| (1.0 + r2).powf(sigma)).collect();
    let g = u.grid().grid();
    let mut total = 0.0;
    for (i, (a, b)) in u.coeffs().iter().zip(ut.coeffs()).enumerate() {
        let r2 = u.grid().norms_sq()[i];
        total += g.weight(i) * mults[i] * (b.norm_sqr() + r2 * a.norm_sqr());
    }
    total.sqrt()
}

/// `Q(Λu, Λu)` in frequency: components are brought to the grid, combined pointwise and
/// transformed back. The result is restricted to the frequency grid; `None` if it is not finite.
pub(crate) fn nonlinearity(
    transform: &DunklTransform,
    q: &QuadraticFormQ,
    u: &SpectralField,
    ut: &SpectralField,
) -> Option<SpectralField> {
    let grid = u.grid().clone();
    if q.is_zero() {
        return Some(SpectralField::zeros(grid));
    }
    let comps: Vec<Vec<f64>> =
        lambda_spectral(u, ut).iter().map(|c| transform.inverse_complex(c).into_iter().map(|v| v.re).collect()).collect();
    let n = comps[0].len();
    let m = comps.len();
    let mut v = vec![0.0; m];
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            for a in 0..m {
                v[a] = comps[a][i];
            }
            Complex64::new(q.eval(&v), 0.0)
        })
        .collect();
    let coeffs = transform.forward_complex(&values);
    SpectralField::new(grid, coeffs).ok()
}

/// `Σ_a sup_x |Λ_a(x)|` from the spectral state.
pub(crate) fn lambda_norm_inf_spectral(transform: &DunklTransform, u: &SpectralField, ut: &SpectralField) -> f64 {
    lambda_spectral(u, ut)
        .iter()
        .map(|c| transform.inverse_complex(c).iter().fold(0.0f64, |m, v| m.max(v.re.abs())))
        .sum()
}
