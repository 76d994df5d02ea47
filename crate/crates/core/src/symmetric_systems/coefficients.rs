//! Matrix-valued coefficient fields and the system specification.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::root_systems::{generate_group, WeightContext};

/// Pointwise evaluator `(t, x) ↦ A(t, x)`.
pub type MatrixFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// Pointwise source `(t, x) ↦ f(t, x) ∈ ℝ^m`.
pub type SourceFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Tolerance for W-invariance of coefficients.
pub const INVARIANCE_TOLERANCE: f64 = 1e-10;

/// Tolerance for symmetry of the principal coefficients.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Sup-norm bounds on a coefficient and its derivatives (spectral norms of matrices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    /// `sup ‖A(t, x)‖₂`.
    pub sup: f64,
    /// Entry `r − 1` bounds `sup max_{|ν| = r} ‖∂^ν_x A(t, x)‖₂`.
    pub derivative_sups: Vec<f64>,
    /// All derivatives beyond the listed orders vanish.
    pub higher_vanish: bool,
}

impl CoefficientBounds {
    /// Bound for derivatives of order `r ≥ 1`, when known.
    pub fn derivative_sup(&self, r: usize) -> Option<f64> {
        match self.derivative_sups.get(r - 1) {
            Some(v) => Some(*v),
            None if self.higher_vanish => Some(0.0),
            None => None,
        }
    }
}

#[derive(Clone)]
enum Kind {
    Constant(DMatrix<f64>),
    Variable { eval: MatrixFn, time_dependent: bool },
}

/// One coefficient matrix `A_p(t, x)` of a first-order system.
#[derive(Clone)]
pub struct CoefficientField {
    size: usize,
    kind: Kind,
    bounds: Option<CoefficientBounds>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant(m) => write!(f, "CoefficientField::Constant({m})"),
            Kind::Variable { time_dependent, .. } => {
                write!(f, "CoefficientField::Variable {{ size: {}, time_dependent: {time_dependent} }}", self.size)
            }
        }
    }
}

impl CoefficientField {
    pub fn constant(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "coefficient matrices are square");
        let sup = spectral_norm(&m);
        Self {
            size: m.nrows(),
            kind: Kind::Constant(m),
            bounds: Some(CoefficientBounds { sup, derivative_sups: vec![], higher_vanish: true }),
        }
    }

    pub fn zero(size: usize) -> Self {
        Self::constant(DMatrix::zeros(size, size))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::constant(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// A variable coefficient without bound metadata.
    pub fn variable(size: usize, time_dependent: bool, eval: MatrixFn) -> Self {
        Self { size, kind: Kind::Variable { eval, time_dependent }, bounds: None }
    }

    pub fn with_bounds(mut self, bounds: CoefficientBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    /// Estimates bounds by sampling on `[−radius, radius]^d × [0, t_max]`, derivatives by
    /// central differences, and inflates the result by `safety`.
    pub fn with_sampled_bounds(self, dim: usize, radius: f64, t_max: f64, order: usize, safety: f64) -> Self {
        let per_axis = match dim {
            1 => 401,
            2 => 61,
            _ => 15,
        };
        let points = sample_points(dim, radius, per_axis);
        let times: Vec<f64> = if self.is_time_dependent() { (0..5).map(|i| t_max * i as f64 / 4.0).collect() } else { vec![0.0] };
        let mut sup = 0.0f64;
        let mut derivative_sups = vec![0.0f64; order];
        let h = 1e-3 * radius.max(1.0);
        for &t in &times {
            for x in &points {
                sup = sup.max(spectral_norm(&self.eval(t, x)));
                for (r, slot) in derivative_sups.iter_mut().enumerate() {
                    for nu in multi_indices_of_order(dim, r + 1) {
                        let d = finite_difference(&|y: &[f64]| self.eval(t, y), x, &nu, h);
                        *slot = slot.max(spectral_norm(&d));
                    }
                }
            }
        }
        let bounds = CoefficientBounds {
            sup: sup * safety,
            derivative_sups: derivative_sups.into_iter().map(|v| v * safety).collect(),
            higher_vanish: false,
        };
        self.with_bounds(bounds)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    pub fn constant_value(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Constant(m) => Some(m),
            Kind::Variable { .. } => None,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.kind, Kind::Variable { time_dependent: true, .. })
    }

    pub fn bounds(&self) -> Option<&CoefficientBounds> {
        self.bounds.as_ref()
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            Kind::Constant(m) => m.clone(),
            Kind::Variable { eval, .. } => eval(t, x),
        }
    }

    /// Largest `|A(t, w·x) − A(t, x)|` over group elements and sample points.
    pub fn invariance_defect(&self, ctx: &WeightContext, points: &[Vec<f64>], times: &[f64]) -> Result<f64> {
        if self.is_constant() {
            return Ok(0.0);
        }
        let group = generate_group(ctx.root_system())?;
        let mut worst = 0.0f64;
        for &t in times {
            for x in points {
                let a = self.eval(t, x);
                for e in 0..group.order() {
                    let b = self.eval(t, &group.act(e, x));
                    worst = worst.max((&a - &b).amax());
                }
            }
        }
        Ok(worst)
    }
}

/// Largest absolute eigenvalue of the symmetric part, which is the spectral norm for symmetric input.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    let skew_part = (m - &sym).amax();
    if skew_part == 0.0 {
        SymmetricEigen::new(sym).eigenvalues.amax()
    } else {
        m.clone().svd(false, false).singular_values.max()
    }
}

/// Deterministic sample points on a lattice in `[−radius, radius]^d`, shifted off the axes.
pub fn sample_points(dim: usize, radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            (0..dim)
                .map(|j| {
                    let i = flat % per_axis;
                    flat /= per_axis;
                    let u = (i as f64 + 0.5) / per_axis as f64;
                    radius * (2.0 * u - 1.0) + 0.013 * (j as f64 + 1.0)
                })
                .collect()
        })
        .collect()
}

/// All multi-indices `ν ∈ ℕ^d` with `|ν| = r`.
pub fn multi_indices_of_order(dim: usize, r: usize) -> Vec<Vec<usize>> {
    crate::polynomial::monomials_of_degree(dim, r as u32)
        .into_iter()
        .map(|e| e.into_iter().map(|v| v as usize).collect())
        .collect()
}

/// All multi-indices with `|ν| ≤ s`, ordered by total degree.
pub fn multi_indices_up_to(dim: usize, s: usize) -> Vec<Vec<usize>> {
    (0..=s).flat_map(|r| multi_indices_of_order(dim, r)).collect()
}

fn finite_difference(f: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], nu: &[usize], h: f64) -> DMatrix<f64> {
    match nu.iter().position(|&n| n > 0) {
        None => f(x),
        Some(j) => {
            let mut rest = nu.to_vec();
            rest[j] -= 1;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            (finite_difference(f, &xp, &rest, h) - finite_difference(f, &xm, &rest, h)) / (2.0 * h)
        }
    }
}

/// A Dunkl-linear symmetric system `∂_t u = Σ_p A_p T_p u + A_0 u + f`.
#[derive(Clone)]
pub struct SymmetricSystemSpec {
    ctx: WeightContext,
    m: usize,
    coefficients: Vec<CoefficientField>,
    source: Option<SourceFn>,
}

impl fmt::Debug for SymmetricSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricSystemSpec")
            .field("dim", &self.ctx.dim())
            .field("m", &self.m)
            .field("coefficients", &self.coefficients)
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl SymmetricSystemSpec {
    /// `coefficients[0]` is `A_0`, `coefficients[p]` multiplies `T_p`.
    ///
    /// `A_1 … A_d` are checked for W-invariance on a sample lattice of radius `probe_radius`.
    pub fn new(
        ctx: WeightContext,
        coefficients: Vec<CoefficientField>,
        source: Option<SourceFn>,
        probe_radius: f64,
    ) -> Result<Self> {
        let d = ctx.dim();
        if coefficients.len() != d + 1 {
            return Err(DunklError::InvalidArgument(format!(
                "expected {} coefficient fields, got {}",
                d + 1,
                coefficients.len()
            )));
        }
        let m = coefficients[0].size();
        if m == 0 || coefficients.iter().any(|c| c.size() != m) {
            return Err(DunklError::InvalidArgument("coefficient sizes differ".into()));
        }
        let points = sample_points(d, probe_radius, if d == 1 { 25 } else { 7 });
        let times = [0.0, 0.37, 1.1];
        // A_0 only needs to be bounded; the reduction of wave equations produces odd entries there.
        for c in &coefficients[1..] {
            let defect = c.invariance_defect(&ctx, &points, &times)?;
            if defect > INVARIANCE_TOLERANCE {
                return Err(DunklError::NotInvariant(defect));
            }
        }
        Ok(Self { ctx, m, coefficients, source })
    }

    pub fn ctx(&self) -> &WeightContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    /// Number of unknowns.
    pub fn components(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[CoefficientField] {
        &self.coefficients
    }

    pub fn source(&self) -> Option<&SourceFn> {
        self.source.as_ref()
    }

    pub fn with_source(mut self, source: Option<SourceFn>) -> Self {
        self.source = source;
        self
    }
}

/// Outcome of [`check_symmetry`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDiagnostics {
    /// Max `|a_{ij} − a_{ji}|` for `A_1 … A_d`.
    pub max_asymmetry: Vec<f64>,
    /// `(p, t, x)` where the largest asymmetry occurred, when the check fails.
    pub witness: Option<(usize, f64, Vec<f64>)>,
    pub passed: bool,
}

/// Samples `A_p(t, x)` for `p ≥ 1` and reports the worst asymmetry.
pub fn check_symmetry(spec: &SymmetricSystemSpec, probe_radius: f64) -> SymmetryDiagnostics {
    let d = spec.dim();
    let points = sample_points(d, probe_radius, if d == 1 { 25 } else { 7 });
    let times = [0.0, 0.37, 1.1];
    let mut max_asymmetry = vec![0.0f64; d];
    let mut worst = (0.0f64, None);
    for p in 1..=d {
        let c = &spec.coefficients()[p];
        for &t in &times {
            for x in &points {
                let a = c.eval(t, x);
                let asym = (&a - a.transpose()).amax();
                max_asymmetry[p - 1] = max_asymmetry[p - 1].max(asym);
                if asym > worst.0 {
                    worst = (asym, Some((p, t, x.clone())));
                }
            }
            if c.is_constant() {
                break;
            }
        }
    }
    let passed = worst.0 < SYMMETRY_TOLERANCE;
    SymmetryDiagnostics { max_asymmetry, witness: if passed { None } else { worst.1 }, passed }
}
