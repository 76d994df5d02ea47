//! First-order reduction of `u_tt = Σ_{ij} T_i(a_ij T_j u) − q_0 u_t − q·T u`.
//!
//! The unknown is `U = (u, ∂_t u, B T u)` with `B = √A`, so `m = d + 2`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::coefficients::{sample_points, CoefficientField, MatrixFn, SymmetricSystemSpec};
use crate::error::{DunklError, Result};
use crate::root_systems::WeightContext;

/// Step for the central differences of `B` in `A_0`.
const DERIVATIVE_STEP: f64 = 1e-5;

pub type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Lower-order terms `q_0(t, x) ∂_t u + q(t, x)·T u`.
#[derive(Clone, Default)]
pub struct FirstOrderTerms {
    pub time: Option<ScalarFn>,
    pub space: Option<VectorFn>,
}

impl FirstOrderTerms {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn damping(q0: f64) -> Self {
        Self { time: Some(Arc::new(move |_, _| q0)), space: None }
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_none() && self.space.is_none()
    }
}

/// Sampling lattice for ellipticity and bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSampling {
    pub radius: f64,
    pub t_max: f64,
    /// Derivative orders recorded in the bound metadata.
    pub order: usize,
    pub safety: f64,
}

impl WaveSampling {
    pub fn new(radius: f64) -> Self {
        Self { radius, t_max: 2.0, order: 2, safety: 1.5 }
    }
}

/// `√A` for a symmetric positive definite `A`.
pub fn matrix_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(DunklError::Ellipticity(min));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let b = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok((&b + b.transpose()) * 0.5)
}

/// Smallest eigenvalue of `A(t, x)` over the sampling lattice.
pub fn ellipticity_constant(a: &CoefficientField, dim: usize, sampling: &WaveSampling) -> f64 {
    let points = sample_points(dim, sampling.radius, if dim == 1 { 25 } else { 7 });
    let times: Vec<f64> =
        if a.is_time_dependent() { (0..5).map(|i| sampling.t_max * i as f64 / 4.0).collect() } else { vec![0.0] };
    let mut min = f64::INFINITY;
    for &t in &times {
        for x in &points {
            let m = a.eval(t, x);
            min = min.min(SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.min());
            if a.is_constant() {
                return min;
            }
        }
    }
    min
}

fn principal_block(b: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let d = b.nrows();
    let mut out = DMatrix::zeros(d + 2, d + 2);
    for j in 0..d {
        out[(1, 2 + j)] = b[(p, j)];
        out[(2 + j, 1)] = b[(j, p)];
    }
    out
}

fn zeroth_block(a: &CoefficientField, q: &FirstOrderTerms, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let d = x.len();
    let mut out = DMatrix::zeros(d + 2, d + 2);
    out[(0, 1)] = 1.0;
    let b = matrix_sqrt(&a.eval(t, x))?;
    if !a.is_constant() {
        let h = DERIVATIVE_STEP;
        for i in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let db = (matrix_sqrt(&a.eval(t, &xp))? - matrix_sqrt(&a.eval(t, &xm))?) / (2.0 * h);
            for j in 0..d {
                out[(1, 2 + j)] += db[(i, j)];
            }
        }
        if a.is_time_dependent() {
            let dt = (matrix_sqrt(&a.eval(t + h, x))? - matrix_sqrt(&a.eval(t - h, x))?) / (2.0 * h);
            let binv = b.clone().try_inverse().ok_or_else(|| DunklError::Singular("B is not invertible".into()))?;
            let g = dt * binv;
            for i in 0..d {
                for j in 0..d {
                    out[(2 + i, 2 + j)] = g[(i, j)];
                }
            }
        }
    }
    if let Some(q0) = &q.time {
        out[(1, 1)] -= q0(t, x);
    }
    if let Some(qs) = &q.space {
        let qv = nalgebra::DVector::from_vec(qs(t, x));
        let binv = b.try_inverse().ok_or_else(|| DunklError::Singular("B is not invertible".into()))?;
        let row = binv * qv;
        for j in 0..d {
            out[(1, 2 + j)] -= row[j];
        }
    }
    Ok(out)
}

/// Builds the symmetric system for `U = (u, u_t, √A T u)`.
///
/// Fails with [`DunklError::Ellipticity`] if `A` has a non-positive eigenvalue at a sample.
pub fn wave_to_system(
    ctx: WeightContext,
    a: CoefficientField,
    q: FirstOrderTerms,
    sampling: WaveSampling,
) -> Result<SymmetricSystemSpec> {
    let d = ctx.dim();
    if a.size() != d {
        return Err(DunklError::InvalidArgument(format!("wave coefficient must be {d}×{d}")));
    }
    let ell = ellipticity_constant(&a, d, &sampling);
    if !(ell > 0.0) {
        return Err(DunklError::Ellipticity(ell));
    }
    let m = d + 2;
    let mut coefficients = Vec::with_capacity(d + 1);
    if a.is_constant() && q.is_empty() {
        let b = matrix_sqrt(&a.eval(0.0, &vec![0.0; d]))?;
        coefficients.push(CoefficientField::constant(zeroth_block(&a, &q, 0.0, &vec![0.0; d])?));
        for p in 0..d {
            coefficients.push(CoefficientField::constant(principal_block(&b, p)));
        }
    } else {
        let time_dependent = a.is_time_dependent();
        let (a0, q0) = (a.clone(), q.clone());
        let eval: MatrixFn = Arc::new(move |t, x| {
            zeroth_block(&a0, &q0, t, x).unwrap_or_else(|_| DMatrix::from_element(x.len() + 2, x.len() + 2, f64::NAN))
        });
        coefficients.push(
            CoefficientField::variable(m, time_dependent || q.time.is_some() || q.space.is_some(), eval)
                .with_sampled_bounds(d, sampling.radius, sampling.t_max, sampling.order, sampling.safety),
        );
        for p in 0..d {
            let field = if a.is_constant() {
                CoefficientField::constant(principal_block(&matrix_sqrt(&a.eval(0.0, &vec![0.0; d]))?, p))
            } else {
                let ap = a.clone();
                let eval: MatrixFn = Arc::new(move |t, x| match matrix_sqrt(&ap.eval(t, x)) {
                    Ok(b) => principal_block(&b, p),
                    Err(_) => DMatrix::from_element(x.len() + 2, x.len() + 2, f64::NAN),
                });
                CoefficientField::variable(m, time_dependent, eval).with_sampled_bounds(
                    d,
                    sampling.radius,
                    sampling.t_max,
                    sampling.order,
                    sampling.safety,
                )
            };
            coefficients.push(field);
        }
    }
    SymmetricSystemSpec::new(ctx, coefficients, None, sampling.radius)
}
