//! Forward and inverse Dunkl transforms by dense tensorised quadrature.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSeries;
use crate::error::{DunklError, Result};
use crate::grid::{apply_along_axis, Axis, CMatrix, GridFunction, TensorGrid, WClosedGrid};
use crate::quadrature::radial_gauss;
use crate::root_systems::WeightContext;

/// Relative boundary magnitude above which data counts as truncated.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Round-trip tolerance for accepting a calibrated inverse constant.
pub const CALIBRATION_TOLERANCE: f64 = 1e-6;

/// Frequency-side tensor grid: mirrored Gauss–Jacobi nodes on `[−Ξ, Ξ]` per axis,
/// weights for `∫ · ω_k(ξ) dξ`.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    grid: TensorGrid,
    max_radius: f64,
    axis_k: Vec<f64>,
    norms_sq: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(axis_k: &[f64], half_nodes: usize, max_radius: f64) -> Result<Self> {
        if half_nodes == 0 || !(max_radius > 0.0) {
            return Err(DunklError::InvalidGrid("frequency grid needs nodes and a positive radius".into()));
        }
        let mut axes = Vec::with_capacity(axis_k.len());
        for &k in axis_k {
            let (nodes, w) = radial_gauss(half_nodes, 2.0 * k, max_radius)?;
            let w: Vec<f64> = w.into_iter().map(|v| v * 2f64.powf(k)).collect();
            axes.push(Axis::mirrored(&nodes, &w));
        }
        let grid = TensorGrid::new(axes);
        let norms_sq = (0..grid.len()).map(|i| grid.point(i).iter().map(|v| v * v).sum()).collect();
        Ok(Self { grid, max_radius, axis_k: axis_k.to_vec(), norms_sq })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn axis_multiplicities(&self) -> &[f64] {
        &self.axis_k
    }

    /// `‖ξ_m‖²` for every node.
    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    /// Index of `−ξ_m`.
    pub fn negated(&self, flat: usize) -> usize {
        (0..self.dim()).fold(flat, |i, ax| self.grid.flip(i, ax))
    }
}

/// Complex coefficients on a [`FrequencyGrid`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<FrequencyGrid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Arc<FrequencyGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(DunklError::InvalidArgument(format!(
                "{} coefficients for {} frequency nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(DunklError::InvalidArgument("spectral field has non-finite entries".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Arc<FrequencyGrid>) -> Self {
        let n = grid.len();
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiplies coefficient `m` by `mult(ξ_m, ‖ξ_m‖²)`.
    pub fn multiply(&self, mult: impl Fn(&[f64], f64) -> Complex64) -> Self {
        let g = self.grid.grid();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * mult(&g.point(i), self.grid.norms_sq[i]))
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: Complex64, other: &Self) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect(),
        }
    }

    /// Pointwise product of coefficient vectors.
    pub fn product(&self, other: &Self) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * y).collect(),
        }
    }

    /// `Σ_m W_m conj(a_m) b_m`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let g = self.grid.grid();
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * g.weight(i))
            .sum()
    }

    /// `(Σ_m W_m |F_m|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|F|` on the outermost frequency layer.
    pub fn boundary_magnitude(&self) -> f64 {
        let g = self.grid.grid();
        (0..self.coeffs.len()).filter(|&i| g.is_boundary(i)).fold(0.0, |m, i| m.max(self.coeffs[i].norm()))
    }

    /// `max_m |F(−ξ_m) − conj F(ξ_m)|`, zero for transforms of real data.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.negated(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Record of a frozen transform normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationManifest {
    pub dim: usize,
    pub multiplicities: Vec<f64>,
    pub inverse_constant: f64,
    pub closed_form_inverse_constant: f64,
    pub plancherel_constant: f64,
    pub calibration_residual: f64,
    pub max_frequency: f64,
    pub spatial_nodes_per_axis: usize,
    pub spatial_spacing: f64,
    pub frequency_nodes_per_axis: usize,
}

/// Dense Dunkl transform between a [`WClosedGrid`] and a [`FrequencyGrid`].
///
/// The forward map is `ℱf(ξ) = ∫ f(x) K(−iξ, x) ω_k(x) dx`. The inverse uses
/// `K(iξ, x)` and a constant `m_k` calibrated on a Gaussian at construction.
#[derive(Debug, Clone)]
pub struct DunklTransform {
    spatial: Arc<WClosedGrid>,
    frequency: Arc<FrequencyGrid>,
    forward_axes: Vec<CMatrix>,
    inverse_axes: Vec<CMatrix>,
    inverse_constant: f64,
    calibration_residual: f64,
    strict: bool,
}

impl DunklTransform {
    pub fn new(spatial: Arc<WClosedGrid>, frequency: Arc<FrequencyGrid>) -> Result<Self> {
        Self::with_tolerance(spatial, frequency, CALIBRATION_TOLERANCE)
    }

    /// As [`DunklTransform::new`] with a custom round-trip acceptance tolerance.
    pub fn with_tolerance(spatial: Arc<WClosedGrid>, frequency: Arc<FrequencyGrid>, tol: f64) -> Result<Self> {
        if spatial.axis_multiplicities() != frequency.axis_multiplicities() {
            return Err(DunklError::InvalidGrid("spatial and frequency grids disagree on multiplicities".into()));
        }
        let mut forward_axes = Vec::with_capacity(spatial.dim());
        let mut inverse_axes = Vec::with_capacity(spatial.dim());
        for (j, &k) in spatial.axis_multiplicities().iter().enumerate() {
            let series = KernelSeries::new(k)?;
            let xa = &spatial.grid().axes()[j];
            let fa = &frequency.grid().axes()[j];
            forward_axes.push(CMatrix::try_from_fn(fa.len(), xa.len(), |m, i| {
                Ok(series.eval_product(Complex64::new(0.0, -fa.nodes[m] * xa.nodes[i]))? * xa.weights[i])
            })?);
            inverse_axes.push(CMatrix::try_from_fn(xa.len(), fa.len(), |i, m| {
                Ok(series.eval_product(Complex64::new(0.0, fa.nodes[m] * xa.nodes[i]))? * fa.weights[m])
            })?);
        }
        let mut t = Self {
            spatial,
            frequency,
            forward_axes,
            inverse_axes,
            inverse_constant: 1.0,
            calibration_residual: 0.0,
            strict: false,
        };
        t.calibrate(tol)?;
        Ok(t)
    }

    /// Least-squares `m_k` from a centred Gaussian, then a round-trip check on an
    /// off-centre, non-symmetric test function. Both have width `σ = (L/Ξ)^{1/2}`, which
    /// balances their decay at the spatial and frequency edges.
    fn calibrate(&mut self, tol: f64) -> Result<()> {
        let sigma = (self.spatial.extent() / self.frequency.max_radius()).sqrt();
        let g = GridFunction::from_fn(self.spatial.clone(), |x| {
            (-0.5 * x.iter().map(|v| (v / sigma).powi(2)).sum::<f64>()).exp()
        })?;
        let raw = self.inverse_raw(&self.forward_unchecked(&g));
        let (num, den) = raw
            .iter()
            .zip(g.values())
            .fold((0.0, 0.0), |(n, d), (r, v)| (n + r.re * v, d + r.re * r.re));
        if !(den > 0.0) {
            return Err(DunklError::Accuracy("calibration round trip vanished".into()));
        }
        self.inverse_constant = num / den;
        let d = self.spatial.dim();
        let h = GridFunction::from_fn(self.spatial.clone(), |x| {
            let shift: f64 = x.iter().enumerate().map(|(j, v)| (v / sigma - 0.4 + 0.25 * j as f64).powi(2)).sum();
            (1.0 + 0.5 * x[0] / sigma - 0.3 * x[d - 1] / sigma) * (-0.5 * shift).exp()
        })?;
        let back = self.inverse(&self.forward_unchecked(&h))?;
        let resid = back.values().iter().zip(h.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / h.max_abs();
        self.calibration_residual = resid;
        if resid > tol {
            return Err(DunklError::Accuracy(format!(
                "transform round trip error {resid:e} exceeds {tol:e}; refine the grids or enlarge Ξ"
            )));
        }
        Ok(())
    }

    /// Relative max-norm round-trip error on the check function.
    pub fn calibration_residual(&self) -> f64 {
        self.calibration_residual
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn spatial(&self) -> &Arc<WClosedGrid> {
        &self.spatial
    }

    pub fn frequency(&self) -> &Arc<FrequencyGrid> {
        &self.frequency
    }

    /// The calibrated `m_k` with `f = m_k ∫ ℱf(ξ) K(iξ, ·) ω_k(ξ) dξ`.
    pub fn inverse_constant(&self) -> f64 {
        self.inverse_constant
    }

    /// `c_k² / 2^{2γ+d}`, the value `m_k` takes in the continuum.
    pub fn closed_form_inverse_constant(&self) -> f64 {
        let ctx = self.spatial.ctx();
        let ck = ctx.mehta_constant();
        ck * ck / 2f64.powf(2.0 * ctx.gamma() + ctx.dim() as f64)
    }

    /// `‖ℱf‖²_{L²_k} / ‖f‖²_{L²_k} = 1 / m_k`.
    pub fn plancherel_constant(&self) -> f64 {
        1.0 / self.inverse_constant
    }

    pub fn manifest(&self) -> CalibrationManifest {
        let ctx = self.spatial.ctx();
        CalibrationManifest {
            dim: ctx.dim(),
            multiplicities: self.spatial.axis_multiplicities().to_vec(),
            inverse_constant: self.inverse_constant,
            closed_form_inverse_constant: self.closed_form_inverse_constant(),
            plancherel_constant: self.plancherel_constant(),
            calibration_residual: self.calibration_residual,
            max_frequency: self.frequency.max_radius(),
            spatial_nodes_per_axis: self.spatial.grid().axes()[0].len(),
            spatial_spacing: self.spatial.spacing(),
            frequency_nodes_per_axis: self.frequency.grid().axes()[0].len(),
        }
    }

    /// Relative size of `f` on the outer layer of the spatial grid.
    pub fn truncation_level(f: &GridFunction) -> f64 {
        let m = f.max_abs();
        if m == 0.0 {
            0.0
        } else {
            f.boundary_magnitude() / m
        }
    }

    /// `ℱf` on the frequency grid. In strict mode, data that has not decayed at the
    /// boundary is rejected.
    pub fn forward(&self, f: &GridFunction) -> Result<SpectralField> {
        if self.strict {
            let level = Self::truncation_level(f);
            if level > DECAY_TOLERANCE {
                return Err(DunklError::Truncation { value: level, tol: DECAY_TOLERANCE });
            }
        }
        Ok(self.forward_unchecked(f))
    }

    fn forward_unchecked(&self, f: &GridFunction) -> SpectralField {
        let data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let coeffs = self.forward_complex(&data);
        SpectralField { grid: self.frequency.clone(), coeffs }
    }

    /// Forward map on complex samples.
    pub fn forward_complex(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut shape = self.spatial.grid().shape();
        let mut cur = data.to_vec();
        for (j, mat) in self.forward_axes.iter().enumerate() {
            cur = apply_along_axis(&cur, &shape, j, mat);
            shape[j] = mat.rows;
        }
        cur
    }

    fn inverse_raw(&self, f: &SpectralField) -> Vec<Complex64> {
        let mut shape = self.frequency.grid().shape();
        let mut cur = f.coeffs.clone();
        for (j, mat) in self.inverse_axes.iter().enumerate() {
            cur = apply_along_axis(&cur, &shape, j, mat);
            shape[j] = mat.rows;
        }
        cur
    }

    /// Inverse transform on complex samples.
    pub fn inverse_complex(&self, f: &SpectralField) -> Vec<Complex64> {
        self.inverse_raw(f).into_iter().map(|v| v * self.inverse_constant).collect()
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, f: &SpectralField) -> Result<GridFunction> {
        GridFunction::new(self.spatial.clone(), self.inverse_complex(f).into_iter().map(|v| v.re).collect())
    }

    /// `ℱf` at arbitrary frequencies.
    pub fn forward_at(&self, f: &GridFunction, xi: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        let g = self.spatial.grid();
        let series = self.series()?;
        let pts = g.points();
        xi.iter()
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, p) in pts.iter().enumerate() {
                    let mut kv = Complex64::new(g.weight(i) * f.values()[i], 0.0);
                    for (j, s) in series.iter().enumerate() {
                        kv *= s.eval_product(Complex64::new(0.0, -x[j] * p[j]))?;
                    }
                    acc += kv;
                }
                Ok(acc)
            })
            .collect()
    }

    /// The inverse transform evaluated at arbitrary points.
    pub fn inverse_at(&self, f: &SpectralField, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        let g = self.frequency.grid();
        let series = self.series()?;
        let nodes = g.points();
        points
            .iter()
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, xi) in nodes.iter().enumerate() {
                    let mut kv = f.coeffs[m] * g.weight(m);
                    for (j, s) in series.iter().enumerate() {
                        kv *= s.eval_product(Complex64::new(0.0, xi[j] * x[j]))?;
                    }
                    acc += kv;
                }
                Ok(acc * self.inverse_constant)
            })
            .collect()
    }

    fn series(&self) -> Result<Vec<KernelSeries>> {
        self.spatial.axis_multiplicities().iter().map(|&k| KernelSeries::new(k)).collect()
    }

    /// `K(iξ_m, y)` for every frequency node.
    pub fn kernel_on_frequencies(&self, y: &[f64]) -> Result<Vec<Complex64>> {
        let g = self.frequency.grid();
        let series = self.series()?;
        (0..g.len())
            .map(|m| {
                let xi = g.point(m);
                let mut kv = Complex64::new(1.0, 0.0);
                for (j, s) in series.iter().enumerate() {
                    kv *= s.eval_product(Complex64::new(0.0, xi[j] * y[j]))?;
                }
                Ok(kv)
            })
            .collect()
    }
}

/// Builds a spatial grid, frequency grid and calibrated transform in one call.
pub fn build_transform(
    ctx: &WeightContext,
    half_nodes: usize,
    spacing: f64,
    freq_half_nodes: usize,
    max_frequency: f64,
) -> Result<DunklTransform> {
    let spatial = Arc::new(WClosedGrid::staggered(ctx, half_nodes, spacing)?);
    let frequency = Arc::new(FrequencyGrid::new(spatial.axis_multiplicities(), freq_half_nodes, max_frequency)?);
    DunklTransform::new(spatial, frequency)
}
