//! Sparse multivariate polynomials with real coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{DunklError, Result};

/// Coefficients below this magnitude are dropped after every operation.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// Remainders above this magnitude make [`Polynomial::div_linear`] fail.
pub const DIVISION_TOLERANCE: f64 = 1e-10;

pub type MultiIndex = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn monomial(exponents: &[u32], c: f64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents.to_vec(), c);
        p
    }

    /// The coordinate function `x_j`.
    pub fn coordinate(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        Self::monomial(&e, 1.0)
    }

    /// The linear form `⟨a, x⟩`.
    pub fn linear(a: &[f64]) -> Self {
        let mut p = Self::zero(a.len());
        for (j, &c) in a.iter().enumerate() {
            let mut e = vec![0; a.len()];
            e[j] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "multi-index length must match dimension");
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn add_term(&mut self, e: MultiIndex, c: f64) {
        let v = self.terms.get(&e).copied().unwrap_or(0.0) + c;
        if v.abs() < DROP_THRESHOLD {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() >= DROP_THRESHOLD);
        self
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }.pruned()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut f = e.clone();
                f[j] -= 1;
                out.add_term(f, c * e[j] as f64);
            }
        }
        out
    }

    /// `x ↦ p(M x)` for a `d × d` matrix given row-major.
    pub fn compose_linear(&self, m: &[Vec<f64>]) -> Self {
        let rows: Vec<Polynomial> = m.iter().map(|row| Polynomial::linear(row)).collect();
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(self.dim, *c);
            for (i, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    term = &term * &rows[i];
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Exact quotient by the linear form `⟨a, x⟩`.
    ///
    /// Fails with [`DunklError::InexactDivision`] when the remainder is not negligible.
    pub fn div_linear(&self, a: &[f64]) -> Result<Self> {
        let (pivot, &ap) = a
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .ok_or_else(|| DunklError::InvalidArgument("empty linear form".into()))?;
        if ap == 0.0 {
            return Err(DunklError::InvalidArgument("division by the zero form".into()));
        }
        let mut rem = self.terms.clone();
        let mut quot = Self::zero(self.dim);
        loop {
            let next = rem
                .iter()
                .filter(|(e, _)| e[pivot] > 0)
                .max_by_key(|(e, _)| e[pivot])
                .map(|(e, c)| (e.clone(), *c));
            let Some((e, c)) = next else { break };
            let mut q = e.clone();
            q[pivot] -= 1;
            let factor = c / ap;
            rem.remove(&e);
            for (i, &ai) in a.iter().enumerate() {
                if i == pivot || ai == 0.0 {
                    continue;
                }
                let mut t = q.clone();
                t[i] += 1;
                *rem.entry(t).or_insert(0.0) -= factor * ai;
            }
            quot.add_term(q, factor);
        }
        let residual = rem.values().fold(0.0f64, |m, c| m.max(c.abs()));
        let scale = self.max_abs().max(1.0);
        if residual > DIVISION_TOLERANCE * scale {
            return Err(DunklError::InexactDivision(residual));
        }
        Ok(quot)
    }

    /// Max-abs distance between coefficient vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out.pruned()
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut terms: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: MultiIndex = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(0.0) += c1 * c2;
            }
        }
        Polynomial { dim: self.dim, terms }.pruned()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0)
                    .map(|(i, p)| if *p == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, p) })
                    .collect();
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// All multi-indices of total degree `n` in `d` variables, in a fixed order.
pub fn monomials_of_degree(d: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for p in (0..=left).rev() {
            cur[pos] = p;
            rec(pos + 1, left - p, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}
