//! Reflection-closed tensor grids and sampled functions.
//!
//! Spatial grids use the staggered nodes `±(i - 1/2) h`, which are closed under every
//! coordinate sign change and never touch a reflection hyperplane. Values are stored
//! row-major with the last axis varying fastest.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DunklError, Result};
use crate::quadrature::{fornberg_weights, staggered_weights};
use crate::root_systems::WeightContext;

/// Nodes and quadrature weights along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mirror a half-axis `(0, ∞)` rule into a symmetric ascending one.
    pub fn mirrored(half_nodes: &[f64], half_weights: &[f64]) -> Self {
        let n = half_nodes.len();
        let mut nodes = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        for i in (0..n).rev() {
            nodes.push(-half_nodes[i]);
            weights.push(half_weights[i]);
        }
        nodes.extend_from_slice(half_nodes);
        weights.extend_from_slice(half_weights);
        Self { nodes, weights }
    }
}

/// Tensor product of one-dimensional rules.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for j in (0..axes.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * axes[j + 1].len();
        }
        Self { axes, strides }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (j, s) in self.strides.iter().enumerate() {
            idx[j] = flat / s;
            flat %= s;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a.nodes[i]).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a.weights[i]).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Index of the node obtained by flipping the sign of coordinate `axis`.
    pub fn flip(&self, flat: usize, axis: usize) -> usize {
        let n = self.axes[axis].len();
        let i = (flat / self.strides[axis]) % n;
        flat + (n - 1 - i) * self.strides[axis] - i * self.strides[axis]
    }

    /// True when the node lies on the outermost layer in some direction.
    pub fn is_boundary(&self, flat: usize) -> bool {
        self.multi_index(flat).iter().zip(&self.axes).any(|(&i, a)| i == 0 || i + 1 == a.len())
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn try_from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Result<Complex64>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c)?);
            }
        }
        Ok(Self { rows, cols, data })
    }
}

/// Applies `mat` along `axis` of a row-major tensor of the given shape.
pub fn apply_along_axis(data: &[Complex64], shape: &[usize], axis: usize, mat: &CMatrix) -> Vec<Complex64> {
    assert_eq!(shape[axis], mat.cols, "matrix does not match axis length");
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let n = shape[axis];
    let m = mat.rows;
    let mut out = vec![Complex64::new(0.0, 0.0); outer * m * inner];
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            for (c, slot) in column.iter_mut().enumerate() {
                *slot = data[(o * n + c) * inner + i];
            }
            for r in 0..m {
                let row = &mat.data[r * n..(r + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(&column) {
                    acc += a * b;
                }
                out[(o * m + r) * inner + i] = acc;
            }
        }
    }
    out
}

/// Allowed finite-difference orders for the derivative part of the Dunkl operator.
pub const FD_ORDERS: [usize; 4] = [2, 4, 6, 8];

#[derive(Debug, Clone)]
struct Stencil {
    start: usize,
    weights: Vec<f64>,
}

/// Spatial collocation grid closed under `Z₂^d`, with quadrature weights for `∫ · ω_k dx`.
#[derive(Debug, Clone)]
pub struct WClosedGrid {
    grid: TensorGrid,
    spacing: f64,
    ctx: WeightContext,
    axis_k: Vec<f64>,
    fd_order: usize,
    stencils: Vec<Vec<Stencil>>,
    reflection_maps: Vec<Vec<usize>>,
    root_axis: Vec<usize>,
}

impl WClosedGrid {
    /// `half_nodes` nodes on each side of the origin per axis, spacing `h`, stencil order 6.
    pub fn staggered(ctx: &WeightContext, half_nodes: usize, spacing: f64) -> Result<Self> {
        Self::staggered_with_order(ctx, half_nodes, spacing, 6)
    }

    pub fn staggered_with_order(ctx: &WeightContext, half_nodes: usize, spacing: f64, fd_order: usize) -> Result<Self> {
        let rs = ctx.root_system();
        let axis_k = rs.axis_multiplicities().ok_or_else(|| {
            DunklError::InvalidGrid("tensor grids are reflection-closed only for Z₂^d root systems".into())
        })?;
        if !FD_ORDERS.contains(&fd_order) {
            return Err(DunklError::InvalidGrid(format!("stencil order {fd_order} not in {FD_ORDERS:?}")));
        }
        if !(spacing > 0.0) {
            return Err(DunklError::InvalidGrid("spacing must be positive".into()));
        }
        if 2 * half_nodes < fd_order + 1 {
            return Err(DunklError::InvalidGrid(format!(
                "{} nodes per axis cannot hold an order-{fd_order} stencil",
                2 * half_nodes
            )));
        }
        let mut axes = Vec::with_capacity(axis_k.len());
        for &k in &axis_k {
            let half: Vec<f64> = (0..half_nodes).map(|i| (i as f64 + 0.5) * spacing).collect();
            // ω_k carries |⟨√2 e_j, x⟩|^{2k} = 2^k |x_j|^{2k}
            let w: Vec<f64> = staggered_weights(half_nodes, spacing, 2.0 * k)?
                .into_iter()
                .map(|w| w * 2f64.powf(k))
                .collect();
            axes.push(Axis::mirrored(&half, &w));
        }
        let grid = TensorGrid::new(axes);
        let stencils = grid
            .axes()
            .iter()
            .map(|a| {
                let n = a.len();
                let width = fd_order + 1;
                (0..n)
                    .map(|i| {
                        let start = i.saturating_sub(fd_order / 2).min(n - width);
                        let weights = fornberg_weights(a.nodes[i], &a.nodes[start..start + width], 1);
                        Stencil { start, weights }
                    })
                    .collect()
            })
            .collect();
        let root_axis: Vec<usize> = rs
            .positive_roots()
            .iter()
            .map(|r| r.iter().position(|c| c.abs() > 1e-9).unwrap_or(0))
            .collect();
        let reflection_maps = root_axis
            .iter()
            .map(|&ax| (0..grid.len()).map(|i| grid.flip(i, ax)).collect())
            .collect();
        Ok(Self {
            grid,
            spacing,
            ctx: ctx.clone(),
            axis_k,
            fd_order,
            stencils,
            reflection_maps,
            root_axis,
        })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn ctx(&self) -> &WeightContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn axis_multiplicities(&self) -> &[f64] {
        &self.axis_k
    }

    pub fn fd_order(&self) -> usize {
        self.fd_order
    }

    /// Permutation `π_α` with `nodes[π_α(i)] = σ_α(nodes[i])`, one per positive root.
    pub fn reflection_maps(&self) -> &[Vec<usize>] {
        &self.reflection_maps
    }

    /// Half-width of the grid along each axis.
    pub fn extent(&self) -> f64 {
        self.grid.axes().iter().map(|a| a.nodes[a.len() - 1]).fold(0.0, f64::max)
    }

    /// Smallest `|⟨α, x⟩|` over nodes and roots.
    pub fn hyperplane_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.len() {
            let x = self.grid.point(i);
            for r in self.ctx.root_system().positive_roots() {
                gap = gap.min(crate::root_systems::dot(r, &x).abs());
            }
        }
        gap
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, v)| self.grid.weight(i) * v).sum()
    }
}

/// Samples of a real function on a [`WClosedGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<WClosedGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<WClosedGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(DunklError::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DunklError::InvalidArgument("grid function has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<WClosedGrid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.grid().point(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<WClosedGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<WClosedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f ω_k dx` by the grid quadrature.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `‖f‖_{L²_k}`.
    pub fn l2_norm(&self) -> f64 {
        self.grid.integrate(&self.values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.grid
            .integrate(&self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect::<Vec<_>>())
    }

    /// Largest magnitude on the outermost layer of nodes.
    pub fn boundary_magnitude(&self) -> f64 {
        (0..self.values.len())
            .filter(|&i| self.grid.grid().is_boundary(i))
            .fold(0.0, |m, i| m.max(self.values[i].abs()))
    }
}

/// `T_j f` on the grid: finite-difference `∂_j f` plus the exact reflection quotients.
pub fn dunkl_apply_grid(j: usize, f: &GridFunction) -> Result<GridFunction> {
    let g = f.grid();
    if j >= g.dim() {
        return Err(DunklError::InvalidArgument(format!("axis {j} out of range for dimension {}", g.dim())));
    }
    let tg = g.grid();
    let stride = tg.stride(j);
    let n = tg.axes()[j].len();
    let vals = f.values();
    let mut out = vec![0.0; vals.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % n;
        let base = flat - i * stride;
        let st = &g.stencils[j][i];
        let mut d = 0.0;
        for (q, w) in st.weights.iter().enumerate() {
            d += w * vals[base + (st.start + q) * stride];
        }
        *o = d;
    }
    let rs = g.ctx().root_system();
    for (r, (alpha, &k)) in rs.positive_roots().iter().zip(rs.multiplicity()).enumerate() {
        if k == 0.0 || alpha[j] == 0.0 {
            continue;
        }
        let map = &g.reflection_maps[r];
        let ax = g.root_axis[r];
        for (flat, o) in out.iter_mut().enumerate() {
            let x = tg.axes()[ax].nodes[(flat / tg.stride(ax)) % tg.axes()[ax].len()];
            let ax_dot = alpha[ax] * x;
            *o += k * alpha[j] * (vals[flat] - vals[map[flat]]) / ax_dot;
        }
    }
    GridFunction::new(g.clone(), out)
}

/// `Δ_k f = Σ_j T_j² f` on the grid.
pub fn dunkl_laplacian_grid(f: &GridFunction) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(f.grid().clone());
    for j in 0..f.grid().dim() {
        let t = dunkl_apply_grid(j, &dunkl_apply_grid(j, f)?)?;
        acc = acc.zip_with(&t, |a, b| a + b);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::dunkl_apply_poly;
    use crate::polynomial::Polynomial;
    use crate::root_systems::RootSystem;

    fn grid1(k: f64, half: usize, h: f64) -> Arc<WClosedGrid> {
        let ctx = WeightContext::new(RootSystem::z2_power(&[k]).unwrap()).unwrap();
        Arc::new(WClosedGrid::staggered(&ctx, half, h).unwrap())
    }

    #[test]
    fn structure_invariants() {
        let ctx = WeightContext::new(RootSystem::z2_power(&[0.5, 1.0]).unwrap()).unwrap();
        let g = WClosedGrid::staggered(&ctx, 6, 0.3).unwrap();
        assert_eq!(g.len(), 144);
        assert!((g.hyperplane_gap() - std::f64::consts::SQRT_2 * 0.15).abs() < 1e-12);
        for map in g.reflection_maps() {
            for i in 0..g.len() {
                assert_eq!(map[map[i]], i);
                let (x, y) = (g.grid().point(i), g.grid().point(map[i]));
                let flipped = x.iter().zip(&y).filter(|(a, b)| (**a + **b).abs() < 1e-14 && a.abs() > 0.0).count();
                assert_eq!(flipped, 1);
            }
        }
        assert!(g.grid().weights().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn rejects_bad_grids() {
        let ctx = WeightContext::new(RootSystem::z2_power(&[0.5]).unwrap()).unwrap();
        assert!(matches!(WClosedGrid::staggered(&ctx, 3, 0.1), Err(DunklError::InvalidGrid(_))));
        assert!(WClosedGrid::staggered_with_order(&ctx, 10, 0.1, 5).is_err());
        let a2 = WeightContext::new(RootSystem::a2(0.5).unwrap()).unwrap();
        assert!(WClosedGrid::staggered(&a2, 10, 0.1).is_err());
    }

    #[test]
    fn quadrature_integrates_weighted_gaussian_moments() {
        // ∫ x^{2m} e^{-x²} 2^k |x|^{2k} dx = 2^k Γ(k + m + 1/2)
        use statrs::function::gamma::gamma;
        for k in [0.0, 0.5, 0.7, 1.5] {
            let g = grid1(k, 80, 0.1);
            for m in 0..4 {
                let f = GridFunction::from_fn(g.clone(), |x| x[0].powi(2 * m) * (-x[0] * x[0]).exp()).unwrap();
                let exact = 2f64.powf(k) * gamma(k + m as f64 + 0.5);
                assert!((f.integral() / exact - 1.0).abs() < 1e-8, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = grid1(0.7, 20, 0.2);
        let f = GridFunction::from_fn(g.clone(), |x| x[0] * x[0]).unwrap();
        let t = dunkl_apply_grid(0, &f).unwrap();
        let exact = dunkl_apply_poly(0, &Polynomial::monomial(&[2], 1.0), g.ctx().root_system()).unwrap();
        for (i, v) in t.values().iter().enumerate() {
            let x = g.grid().point(i);
            assert!((v - exact.eval(&x)).abs() < 1e-8);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let g = grid1(1.3, 10, 0.25);
        let f = GridFunction::from_fn(g, |_| 3.5).unwrap();
        assert!(dunkl_apply_grid(0, &f).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn classical_derivative_of_sine() {
        let g = grid1(0.0, 60, 0.05);
        let f = GridFunction::from_fn(g.clone(), |x| x[0].sin()).unwrap();
        let t = dunkl_apply_grid(0, &f).unwrap();
        let err = (0..g.len()).map(|i| (t.values()[i] - g.grid().point(i)[0].cos()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }
}
