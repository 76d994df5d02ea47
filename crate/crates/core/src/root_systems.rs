//! Root systems, their reflection groups, multiplicity functions and the weight `ω_k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{DunklError, Result};
use crate::quadrature::gauss_jacobi;

const ROOT_TOL: f64 = 1e-9;

/// Default cap on the number of group elements produced by [`generate_group`].
pub const GROUP_ELEMENT_CAP: usize = 10_000;

/// Reflection of `x` in the hyperplane orthogonal to `alpha`.
pub fn reflect(alpha: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if alpha.len() != x.len() {
        return Err(DunklError::InvalidArgument(format!(
            "dimension mismatch: root has {} coordinates, point has {}",
            alpha.len(),
            x.len()
        )));
    }
    let norm2 = dot(alpha, alpha);
    if norm2 == 0.0 {
        return Err(DunklError::InvalidArgument("cannot reflect in a zero vector".into()));
    }
    let c = 2.0 * dot(alpha, x) / norm2;
    Ok(x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A positive root system `R₊` together with a multiplicity per positive root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystem {
    dim: usize,
    positive_roots: Vec<Vec<f64>>,
    multiplicity: Vec<f64>,
}

impl RootSystem {
    /// Builds a root system without checking the axioms; see [`validate_root_system`].
    pub fn new(dim: usize, positive_roots: Vec<Vec<f64>>, multiplicity: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(DunklError::InvalidArgument("dimension must be positive".into()));
        }
        if positive_roots.len() != multiplicity.len() {
            return Err(DunklError::InvalidArgument(format!(
                "{} roots but {} multiplicities",
                positive_roots.len(),
                multiplicity.len()
            )));
        }
        if let Some(r) = positive_roots.iter().find(|r| r.len() != dim) {
            return Err(DunklError::InvalidArgument(format!(
                "root {r:?} does not have {dim} coordinates"
            )));
        }
        if let Some(k) = multiplicity.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
            return Err(DunklError::InvalidArgument(format!("multiplicity {k} is not a finite non-negative number")));
        }
        Ok(Self { dim, positive_roots, multiplicity })
    }

    /// The sign-change system `Z₂^d` with roots `√2 e_j` and multiplicity `k[j]` on axis `j`.
    pub fn z2_power(k: &[f64]) -> Result<Self> {
        let d = k.len();
        let roots = (0..d)
            .map(|j| {
                let mut e = vec![0.0; d];
                e[j] = std::f64::consts::SQRT_2;
                e
            })
            .collect();
        Self::new(d, roots, k.to_vec())
    }

    /// `A₂` realised in the plane: three positive roots at 30°, 90° and 150°.
    pub fn a2(k: f64) -> Result<Self> {
        let roots = [30f64, 90.0, 150.0]
            .iter()
            .map(|deg| {
                let t = deg.to_radians();
                vec![std::f64::consts::SQRT_2 * t.cos(), std::f64::consts::SQRT_2 * t.sin()]
            })
            .collect();
        Self::new(2, roots, vec![k; 3])
    }

    /// `B₂` with the coordinate roots carrying `k_axis` and the diagonal roots `k_diag`.
    pub fn b2(k_axis: f64, k_diag: f64) -> Result<Self> {
        let s = std::f64::consts::SQRT_2;
        Self::new(
            2,
            vec![vec![s, 0.0], vec![0.0, s], vec![1.0, 1.0], vec![1.0, -1.0]],
            vec![k_axis, k_axis, k_diag, k_diag],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positive_roots(&self) -> &[Vec<f64>] {
        &self.positive_roots
    }

    pub fn multiplicity(&self) -> &[f64] {
        &self.multiplicity
    }

    /// `γ = Σ_{α ∈ R₊} k(α)`.
    pub fn gamma(&self) -> f64 {
        self.multiplicity.iter().sum()
    }

    /// True when every positive root is a multiple of a coordinate vector.
    pub fn is_coordinate_aligned(&self) -> bool {
        self.positive_roots
            .iter()
            .all(|r| r.iter().filter(|c| c.abs() > ROOT_TOL).count() == 1)
    }

    /// Per-axis multiplicities when the system is `Z₂^d` (one root per axis).
    pub fn axis_multiplicities(&self) -> Option<Vec<f64>> {
        if !self.is_coordinate_aligned() || self.positive_roots.len() != self.dim {
            return None;
        }
        let mut k = vec![f64::NAN; self.dim];
        for (r, m) in self.positive_roots.iter().zip(&self.multiplicity) {
            let axis = r.iter().position(|c| c.abs() > ROOT_TOL)?;
            if !k[axis].is_nan() {
                return None;
            }
            k[axis] = *m;
        }
        Some(k)
    }

    /// The full root system `R = R₊ ∪ (-R₊)` with multiplicities.
    fn full_roots(&self) -> Vec<(Vec<f64>, f64)> {
        self.positive_roots
            .iter()
            .zip(&self.multiplicity)
            .flat_map(|(r, k)| [(r.clone(), *k), (r.iter().map(|c| -c).collect(), *k)])
            .collect()
    }
}

/// Per-axiom outcome of [`validate_root_system`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemDiagnostics {
    pub normalization: bool,
    pub reduced: bool,
    pub reflection_closed: bool,
    pub multiplicity_invariant: bool,
    pub failures: Vec<String>,
}

impl RootSystemDiagnostics {
    pub fn passed(&self) -> bool {
        self.normalization && self.reduced && self.reflection_closed && self.multiplicity_invariant
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < ROOT_TOL)
}

/// Checks the root system axioms, the `⟨α,α⟩ = 2` normalisation and W-invariance of `k`.
pub fn validate_root_system(rs: &RootSystem) -> RootSystemDiagnostics {
    let mut failures = Vec::new();
    let mut normalization = true;
    for r in &rs.positive_roots {
        let n2 = dot(r, r);
        if (n2 - 2.0).abs() > 1e-12 {
            normalization = false;
            failures.push(format!("root {r:?} has ⟨α,α⟩ = {n2}, expected 2"));
        }
    }

    let full = rs.full_roots();
    let mut reduced = true;
    for (i, (a, _)) in full.iter().enumerate() {
        if dot(a, a) == 0.0 {
            reduced = false;
            failures.push("zero root".into());
            continue;
        }
        for (j, (b, _)) in full.iter().enumerate() {
            if i == j {
                continue;
            }
            let na = dot(a, a).sqrt();
            let nb = dot(b, b).sqrt();
            let cos = dot(a, b) / (na * nb);
            let parallel = (cos.abs() - 1.0).abs() < 1e-12;
            let is_neg = close(a, &b.iter().map(|c| -c).collect::<Vec<_>>());
            if parallel && !is_neg {
                reduced = false;
                failures.push(format!("roots {a:?} and {b:?} are parallel but not ±"));
            }
        }
    }

    let mut reflection_closed = true;
    let mut multiplicity_invariant = true;
    for (a, _) in &full {
        for (b, kb) in &full {
            let Ok(img) = reflect(a, b) else { continue };
            match full.iter().find(|(c, _)| close(c, &img)) {
                None => {
                    reflection_closed = false;
                    failures.push(format!("σ_{a:?}({b:?}) = {img:?} is not a root"));
                }
                Some((_, kc)) => {
                    if (kc - kb).abs() > 1e-12 {
                        multiplicity_invariant = false;
                        failures.push(format!("k changes from {kb} to {kc} under σ_{a:?}"));
                    }
                }
            }
        }
    }
    failures.dedup();
    RootSystemDiagnostics { normalization, reduced, reflection_closed, multiplicity_invariant, failures }
}

/// A finite reflection group as an explicit list of orthogonal matrices.
#[derive(Debug, Clone)]
pub struct ReflectionGroup {
    elements: Vec<DMatrix<f64>>,
    generator_index: Vec<usize>,
}

impl ReflectionGroup {
    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index into [`Self::elements`] of the reflection for positive root `i`.
    pub fn generator_index(&self) -> &[usize] {
        &self.generator_index
    }

    pub fn act(&self, element: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.elements[element];
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
    }
}

fn reflection_matrix(alpha: &[f64]) -> DMatrix<f64> {
    let d = alpha.len();
    let n2 = dot(alpha, alpha);
    DMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * alpha[i] * alpha[j] / n2
    })
}

/// Closure of the reflections `σ_α` under composition, with the default element cap.
pub fn generate_group(rs: &RootSystem) -> Result<ReflectionGroup> {
    generate_group_capped(rs, GROUP_ELEMENT_CAP)
}

pub fn generate_group_capped(rs: &RootSystem, cap: usize) -> Result<ReflectionGroup> {
    let d = rs.dim();
    let gens: Vec<DMatrix<f64>> = rs.positive_roots().iter().map(|a| reflection_matrix(a)).collect();
    let find = |els: &[DMatrix<f64>], m: &DMatrix<f64>| els.iter().position(|e| (e - m).norm() < 1e-10);

    let mut elements = vec![DMatrix::<f64>::identity(d, d)];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for g in &gens {
            let prod = g * &elements[idx];
            if find(&elements, &prod).is_none() {
                if elements.len() >= cap {
                    return Err(DunklError::NonTermination { cap });
                }
                elements.push(prod);
                frontier.push(elements.len() - 1);
            }
        }
    }
    let generator_index = gens
        .iter()
        .map(|g| find(&elements, g).expect("generators belong to their closure"))
        .collect();
    Ok(ReflectionGroup { elements, generator_index })
}

/// Root system plus the derived constants `γ` and `c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightContext {
    root_system: RootSystem,
    gamma: f64,
    mehta_constant: f64,
}

impl WeightContext {
    pub fn new(root_system: RootSystem) -> Result<Self> {
        let gamma = root_system.gamma();
        let mehta_constant = mehta_constant(&root_system)?;
        Ok(Self { root_system, gamma, mehta_constant })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.root_system
    }

    pub fn dim(&self) -> usize {
        self.root_system.dim()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mehta_constant(&self) -> f64 {
        self.mehta_constant
    }

    /// `ω_k(x) = Π_{α∈R₊} |⟨α,x⟩|^{2k(α)}`.
    pub fn weight(&self, x: &[f64]) -> f64 {
        weight(&self.root_system, x)
    }
}

pub fn weight(rs: &RootSystem, x: &[f64]) -> f64 {
    rs.positive_roots()
        .iter()
        .zip(rs.multiplicity())
        .filter(|(_, k)| **k != 0.0)
        .map(|(a, k)| dot(a, x).abs().powf(2.0 * k))
        .product()
}

/// Mehta-type constant `c_k = (∫ e^{-‖x‖²} ω_k(x) dx)^{-1}`.
///
/// Uses the polar split `∫ e^{-r²} r^{d-1+2γ} dr · ∫_{S^{d-1}} ω_k`. In the plane the
/// circle is cut at the reflection lines and each arc is integrated with a Gauss–Jacobi
/// rule matched to the algebraic zeros at its ends; the node count doubles until two
/// successive estimates agree to 1e-9. In higher dimension only coordinate-aligned
/// systems are supported, where the integral factorises.
pub fn mehta_constant(rs: &RootSystem) -> Result<f64> {
    let d = rs.dim();
    let gamma_sum = rs.gamma();
    let radial = gamma(gamma_sum + d as f64 / 2.0) / 2.0;
    let sphere = match d {
        1 => weight(rs, &[1.0]) + weight(rs, &[-1.0]),
        2 => circle_integral(rs)?,
        _ => return aligned_mehta(rs),
    };
    Ok(1.0 / (radial * sphere))
}

fn aligned_mehta(rs: &RootSystem) -> Result<f64> {
    if !rs.is_coordinate_aligned() {
        return Err(DunklError::Accuracy(format!(
            "no convergent rule for non-aligned root systems in dimension {}",
            rs.dim()
        )));
    }
    // each aligned root contributes ∫ |a y|^{2k} e^{-y²} dy = |a|^{2k} Γ(k + 1/2)
    let mut used = vec![false; rs.dim()];
    let mut total = 1.0;
    for (r, k) in rs.positive_roots().iter().zip(rs.multiplicity()) {
        let axis = r.iter().position(|c| c.abs() > ROOT_TOL).unwrap_or(0);
        if used[axis] {
            return Err(DunklError::InvalidArgument("two roots on one axis".into()));
        }
        used[axis] = true;
        total *= r[axis].abs().powf(2.0 * k) * gamma(k + 0.5);
    }
    total *= std::f64::consts::PI.sqrt().powi(used.iter().filter(|u| !**u).count() as i32);
    Ok(1.0 / total)
}

fn circle_integral(rs: &RootSystem) -> Result<f64> {
    use std::f64::consts::{PI, TAU};
    // zero angles with the exponent of the vanishing factor
    let mut zeros: Vec<(f64, f64)> = Vec::new();
    for (a, k) in rs.positive_roots().iter().zip(rs.multiplicity()) {
        if *k == 0.0 {
            continue;
        }
        let phi = a[1].atan2(a[0]);
        for shift in [PI / 2.0, -PI / 2.0] {
            zeros.push(((phi + shift).rem_euclid(TAU), 2.0 * k));
        }
    }
    let w_at = |t: f64| weight(rs, &[t.cos(), t.sin()]);
    if zeros.is_empty() {
        return Ok(TAU * w_at(0.0));
    }
    zeros.sort_by(|p, q| p.0.total_cmp(&q.0));
    let estimate = |n: usize| -> Result<f64> {
        let mut total = 0.0;
        for i in 0..zeros.len() {
            let (a, pa) = zeros[i];
            let (mut b, pb) = zeros[(i + 1) % zeros.len()];
            if i + 1 == zeros.len() {
                b += TAU;
            }
            let len = b - a;
            let (x, w) = gauss_jacobi(n, pb, pa)?;
            let mut arc = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + 0.5 * len * (1.0 + xi);
                let smooth = w_at(t) / ((t - a).powf(pa) * (b - t).powf(pb));
                arc += wi * smooth;
            }
            total += arc * (0.5 * len).powf(pa + pb + 1.0);
        }
        Ok(total)
    };
    let mut n = 16;
    let mut prev = estimate(n)?;
    while n <= 1024 {
        n *= 2;
        let next = estimate(n)?;
        if (next - prev).abs() <= 1e-9 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(DunklError::Accuracy(format!("circle quadrature still moving at n = {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[SQRT_2, 0.0], &[1.0, 2.0]).unwrap(), vec![-1.0, 2.0]);
        let r = reflect(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((r[0] - 0.0).abs() < 1e-15 && (r[1] + 1.0).abs() < 1e-15);
        let fixed = reflect(&[1.0, 2.0], &[2.0, -1.0]).unwrap();
        assert!(close(&fixed, &[2.0, -1.0]));
        assert!(matches!(reflect(&[0.0, 0.0], &[1.0, 1.0]), Err(DunklError::InvalidArgument(_))));
    }

    #[test]
    fn validation_flags_each_axiom() {
        assert!(validate_root_system(&RootSystem::z2_power(&[0.5, 1.0]).unwrap()).passed());
        assert!(validate_root_system(&RootSystem::a2(0.3).unwrap()).passed());
        assert!(validate_root_system(&RootSystem::b2(0.3, 0.8).unwrap()).passed());

        let bad_norm = RootSystem::new(1, vec![vec![1.0]], vec![0.5]).unwrap();
        let diag = validate_root_system(&bad_norm);
        assert!(!diag.normalization && diag.reflection_closed);

        let open = RootSystem::new(2, vec![vec![SQRT_2, 0.0], vec![1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        let diag = validate_root_system(&open);
        assert!(diag.normalization && !diag.reflection_closed);

        let non_inv = RootSystem::new(2, RootSystem::a2(0.0).unwrap().positive_roots().to_vec(), vec![0.1, 0.2, 0.1]).unwrap();
        assert!(!validate_root_system(&non_inv).multiplicity_invariant);
    }

    #[test]
    fn group_orders() {
        let z1 = generate_group(&RootSystem::z2_power(&[0.5]).unwrap()).unwrap();
        assert_eq!(z1.order(), 2);
        let z3 = generate_group(&RootSystem::z2_power(&[0.5, 0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(z3.order(), 8);
        for g in z3.elements() {
            for i in 0..3 {
                for j in 0..3 {
                    let v = g[(i, j)];
                    if i == j {
                        assert!((v.abs() - 1.0).abs() < 1e-14);
                    } else {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
        assert_eq!(generate_group(&RootSystem::a2(1.0).unwrap()).unwrap().order(), 6);
        assert_eq!(generate_group(&RootSystem::b2(1.0, 1.0).unwrap()).unwrap().order(), 8);
    }

    #[test]
    fn group_cap_reports_non_termination() {
        // a reflection at an irrational angle generates an infinite dihedral group
        let t: f64 = 1.0;
        let rs = RootSystem::new(2, vec![vec![SQRT_2, 0.0], vec![SQRT_2 * t.cos(), SQRT_2 * t.sin()]], vec![0.0, 0.0]).unwrap();
        assert_eq!(generate_group_capped(&rs, 200).unwrap_err(), DunklError::NonTermination { cap: 200 });
    }

    #[test]
    fn weight_examples() {
        let rs = RootSystem::z2_power(&[0.0, 0.0]).unwrap();
        assert_eq!(weight(&rs, &[0.3, -2.0]), 1.0);
        let rs = RootSystem::z2_power(&[0.5]).unwrap();
        assert_relative_eq!(weight(&rs, &[2.0]), 2.0 * SQRT_2, max_relative = 1e-15);
        let rs = RootSystem::a2(0.4).unwrap();
        let on_plane = [-(30f64.to_radians().sin()), 30f64.to_radians().cos()];
        assert!(weight(&rs, &on_plane) < 1e-12);
    }

    #[test]
    fn mehta_examples() {
        let c = mehta_constant(&RootSystem::z2_power(&[0.0]).unwrap()).unwrap();
        assert_relative_eq!(c, 1.0 / PI.sqrt(), max_relative = 1e-14);
        let c = mehta_constant(&RootSystem::z2_power(&[0.5]).unwrap()).unwrap();
        assert_relative_eq!(c, 1.0 / SQRT_2, max_relative = 1e-14);
        let c = mehta_constant(&RootSystem::z2_power(&[0.0, 0.0]).unwrap()).unwrap();
        assert_relative_eq!(c, 1.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn mehta_closed_form_oracle() {
        // Z₂^d: ∫ |√2 y|^{2k} e^{-y²} dy = 2^k Γ(k + 1/2) per axis
        for k in [0.3, 0.7, 1.5] {
            let c = mehta_constant(&RootSystem::z2_power(&[k, 0.5]).unwrap()).unwrap();
            let expected = 1.0 / (2f64.powf(k) * gamma(k + 0.5) * SQRT_2 * gamma(1.0));
            assert_relative_eq!(c, expected, max_relative = 1e-9);
        }
        // A₂ with integer k = 1: ω is a degree-6 polynomial, compare with 2D Gauss–Hermite-free brute force
        let rs = RootSystem::a2(1.0).unwrap();
        let c = mehta_constant(&rs).unwrap();
        let brute = brute_force_gaussian_integral(&rs);
        assert_relative_eq!(1.0 / c, brute, max_relative = 1e-9);
        let rs = RootSystem::a2(0.35).unwrap();
        let c = mehta_constant(&rs).unwrap();
        let brute = brute_force_gaussian_integral(&rs);
        assert_relative_eq!(1.0 / c, brute, max_relative = 1e-5);
    }

    fn brute_force_gaussian_integral(rs: &RootSystem) -> f64 {
        // fine midpoint rule in polar coordinates
        let nr = 4000;
        let nt = 8000;
        let rmax = 7.0;
        let (hr, ht) = (rmax / nr as f64, 2.0 * PI / nt as f64);
        let mut ang = 0.0;
        for j in 0..nt {
            let t = (j as f64 + 0.5) * ht;
            ang += weight(rs, &[t.cos(), t.sin()]) * ht;
        }
        let g = rs.gamma();
        let mut rad = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) * hr;
            rad += r.powf(1.0 + 2.0 * g) * (-r * r).exp() * hr;
        }
        ang * rad
    }

    #[test]
    fn weight_is_invariant_and_homogeneous() {
        for rs in [RootSystem::a2(0.7).unwrap(), RootSystem::b2(0.3, 1.2).unwrap()] {
            let grp = generate_group(&rs).unwrap();
            let ctx = WeightContext::new(rs).unwrap();
            for x in [[0.3, -1.1], [2.0, 0.7], [-0.4, -0.9]] {
                let w0 = ctx.weight(&x);
                for e in 0..grp.order() {
                    assert!((ctx.weight(&grp.act(e, &x)) - w0).abs() <= 1e-12 * w0.max(1.0));
                }
                for lambda in [0.5f64, 2.0, 3.0] {
                    let xs: Vec<f64> = x.iter().map(|c| c * lambda).collect();
                    let expected = lambda.powf(2.0 * ctx.gamma()) * w0;
                    assert_relative_eq!(ctx.weight(&xs), expected, max_relative = 1e-10);
                }
            }
        }
    }
}
