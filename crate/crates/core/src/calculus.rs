//! Dunkl operators acting exactly on polynomials, and the intertwining operator `V_k`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{DunklError, Result};
use crate::polynomial::{monomials_of_degree, MultiIndex, Polynomial};
use crate::root_systems::RootSystem;

/// Default maximal degree accepted by [`Intertwiner`].
pub const DEFAULT_MAX_INTERTWINE_DEGREE: u32 = 10;

fn reflection_rows(alpha: &[f64]) -> Vec<Vec<f64>> {
    let n2: f64 = alpha.iter().map(|a| a * a).sum();
    let d = alpha.len();
    (0..d)
        .map(|i| (0..d).map(|j| f64::from(u8::from(i == j)) - 2.0 * alpha[i] * alpha[j] / n2).collect())
        .collect()
}

/// `(p - p∘σ_α) / ⟨α, x⟩`, computed by exact division.
fn reflection_quotient(p: &Polynomial, alpha: &[f64]) -> Result<Polynomial> {
    let diff = p - &p.compose_linear(&reflection_rows(alpha));
    diff.div_linear(alpha)
}

/// `T_j p = ∂_j p + Σ_α k(α) α_j (p - p∘σ_α)/⟨α,x⟩`.
pub fn dunkl_apply_poly(j: usize, p: &Polynomial, rs: &RootSystem) -> Result<Polynomial> {
    if j >= rs.dim() || p.dim() != rs.dim() {
        return Err(DunklError::InvalidArgument(format!(
            "axis {j} or polynomial dimension {} incompatible with root system of dimension {}",
            p.dim(),
            rs.dim()
        )));
    }
    let mut out = p.partial(j);
    for (alpha, &k) in rs.positive_roots().iter().zip(rs.multiplicity()) {
        if k == 0.0 || alpha[j] == 0.0 {
            continue;
        }
        let q = reflection_quotient(p, alpha)?;
        out = &out + &q.scale(k * alpha[j]);
    }
    Ok(out)
}

/// `Δ_k p = Σ_j T_j² p`.
pub fn dunkl_laplacian_poly(p: &Polynomial, rs: &RootSystem) -> Result<Polynomial> {
    let mut out = Polynomial::zero(p.dim());
    for j in 0..rs.dim() {
        let t = dunkl_apply_poly(j, p, rs)?;
        out = &out + &dunkl_apply_poly(j, &t, rs)?;
    }
    Ok(out)
}

/// The gradient/difference form
/// `Δp + 2 Σ_α k(α) [⟨∇p,α⟩/⟨α,x⟩ - (p - p∘σ_α)/⟨α,x⟩²]`,
/// valid under the normalisation `⟨α,α⟩ = 2`.
pub fn dunkl_laplacian_gradient_form(p: &Polynomial, rs: &RootSystem) -> Result<Polynomial> {
    let d = p.dim();
    let mut out = Polynomial::zero(d);
    for j in 0..d {
        out = &out + &p.partial(j).partial(j);
    }
    for (alpha, &k) in rs.positive_roots().iter().zip(rs.multiplicity()) {
        if k == 0.0 {
            continue;
        }
        let mut grad_alpha = Polynomial::zero(d);
        for (j, &a) in alpha.iter().enumerate() {
            grad_alpha = &grad_alpha + &p.partial(j).scale(a);
        }
        let lin = Polynomial::linear(alpha);
        let diff = p - &p.compose_linear(&reflection_rows(alpha));
        let numer = &(&grad_alpha * &lin) - &diff;
        let term = numer.div_linear(alpha)?.div_linear(alpha)?;
        out = &out + &term.scale(2.0 * k);
    }
    Ok(out)
}

/// The intertwining operator `V_k` on polynomials, built degree by degree from
/// `T_j V_k = V_k ∂_j`, `V_k 1 = 1`. Images of monomials are cached.
pub struct Intertwiner {
    rs: RootSystem,
    max_degree: u32,
    cache: HashMap<MultiIndex, Polynomial>,
}

impl Intertwiner {
    pub fn new(rs: RootSystem) -> Self {
        Self::with_max_degree(rs, DEFAULT_MAX_INTERTWINE_DEGREE)
    }

    pub fn with_max_degree(rs: RootSystem, max_degree: u32) -> Self {
        Self { rs, max_degree, cache: HashMap::new() }
    }

    /// `V_k p` for a homogeneous polynomial `p`.
    pub fn apply(&mut self, p: &Polynomial) -> Result<Polynomial> {
        if !p.is_homogeneous() {
            return Err(DunklError::InvalidArgument("V_k is applied to homogeneous polynomials only".into()));
        }
        if let Some(n) = p.degree() {
            if n > self.max_degree {
                return Err(DunklError::InvalidArgument(format!(
                    "degree {n} exceeds configured maximum {}",
                    self.max_degree
                )));
            }
        }
        let mut out = Polynomial::zero(p.dim());
        for (e, c) in p.terms() {
            out = &out + &self.monomial(e)?.scale(*c);
        }
        Ok(out)
    }

    fn monomial(&mut self, e: &MultiIndex) -> Result<Polynomial> {
        if let Some(v) = self.cache.get(e) {
            return Ok(v.clone());
        }
        let d = self.rs.dim();
        let n: u32 = e.iter().sum();
        let v = if n == 0 {
            Polynomial::constant(d, 1.0)
        } else {
            // right-hand sides V_k(∂_j x^e) = e_j V_k(x^{e - e_j})
            let mut rhs = Vec::with_capacity(d);
            for j in 0..d {
                if e[j] == 0 {
                    rhs.push(Polynomial::zero(d));
                } else {
                    let mut f = e.clone();
                    f[j] -= 1;
                    rhs.push(self.monomial(&f)?.scale(e[j] as f64));
                }
            }
            self.solve_degree(n, &rhs)?
        };
        self.cache.insert(e.clone(), v.clone());
        Ok(v)
    }

    /// Finds `q ∈ P_n` with `T_j q = rhs_j` for every `j` (least squares, then residual check).
    fn solve_degree(&self, n: u32, rhs: &[Polynomial]) -> Result<Polynomial> {
        let d = self.rs.dim();
        let cols = monomials_of_degree(d, n);
        let rows = monomials_of_degree(d, n - 1);
        let row_pos: HashMap<&MultiIndex, usize> = rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let nr = rows.len() * d;
        let mut mat = DMatrix::<f64>::zeros(nr, cols.len());
        for (c, mono) in cols.iter().enumerate() {
            let p = Polynomial::monomial(mono, 1.0);
            for j in 0..d {
                let t = dunkl_apply_poly(j, &p, &self.rs)?;
                for (e, v) in t.terms() {
                    mat[(j * rows.len() + row_pos[e], c)] = *v;
                }
            }
        }
        let mut b = DVector::<f64>::zeros(nr);
        for (j, r) in rhs.iter().enumerate() {
            for (e, v) in r.terms() {
                b[j * rows.len() + row_pos[e]] = *v;
            }
        }
        let svd = mat.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-12 * smax {
            return Err(DunklError::Singular(format!(
                "degree-{n} intertwining system has condition {:e}",
                smax / smin
            )));
        }
        let x = svd
            .solve(&b, 0.0)
            .map_err(|e| DunklError::Singular(e.to_string()))?;
        let resid = (&mat * &x - &b).amax();
        if resid > 1e-9 * b.amax().max(1.0) {
            return Err(DunklError::Singular(format!("residual {resid:e} in degree-{n} system")));
        }
        Ok(Polynomial::from_terms(d, cols.into_iter().zip(x.iter().copied())))
    }
}
