//! Quadrature and finite-difference building blocks.
//!
//! Everything here is one-dimensional; the grids in [`crate::grid`] are tensor
//! products of these rules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{DunklError, Result};

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1 - x)^a (1 + x)^b`,
/// computed with the Golub–Welsch eigenvalue method. Nodes are ascending.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(DunklError::InvalidArgument("Gauss–Jacobi rule needs n >= 1".into()));
    }
    if a <= -1.0 || b <= -1.0 {
        return Err(DunklError::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got ({a}, {b})"
        )));
    }
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let nf = i as f64;
        let diag = if i == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * nf + ab) * (2.0 * nf + ab + 2.0))
        };
        jac[(i, i)] = diag;
        if i + 1 < n {
            let m = nf + 1.0;
            let num = 4.0 * m * (m + a) * (m + b) * (m + ab);
            let den = (2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0);
            let off = (num / den).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs.into_iter().unzip())
}

/// Rule for `∫_0^R ξ^β g(ξ) dξ`: nodes in `(0, R)` ascending, weights include `ξ^β`.
pub fn radial_gauss(n: usize, beta: f64, radius: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_jacobi(n, 0.0, beta)?;
    // u = (1 + x) / 2 on [0, 1], then ξ = R u.
    let scale = radius.powf(beta + 1.0) * 2f64.powf(-beta - 1.0);
    let nodes = x.iter().map(|&t| radius * 0.5 * (1.0 + t)).collect();
    let weights = w.iter().map(|&wi| wi * scale).collect();
    Ok((nodes, weights))
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_jacobi(n, 0.0, 0.0)?;
    let half = 0.5 * (b - a);
    Ok((
        x.iter().map(|&t| a + half * (1.0 + t)).collect(),
        w.iter().map(|&wi| wi * half).collect(),
    ))
}

const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta function for real `s != 1`.
pub fn zeta(s: f64) -> f64 {
    if s > 1.0 {
        return zeta_euler_maclaurin(s);
    }
    if s == 0.0 {
        return -0.5;
    }
    if s < 0.0 && (s / 2.0 - (s / 2.0).round()).abs() < 1e-14 {
        return 0.0;
    }
    // functional equation: ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)
    let pi = std::f64::consts::PI;
    2f64.powf(s) * pi.powf(s - 1.0) * (pi * s / 2.0).sin() * gamma(1.0 - s) * zeta(1.0 - s)
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    let n = 20usize;
    let nf = n as f64;
    let mut sum = 0.0;
    for k in 1..n {
        sum += (k as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // Σ B_2j / (2j)! · s(s+1)…(s+2j-2) · N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        sum += b / fact * rising * npow;
        let jf = (j + 1) as f64;
        rising *= (s + 2.0 * jf - 1.0) * (s + 2.0 * jf);
        fact *= (2.0 * jf + 1.0) * (2.0 * jf + 2.0);
        npow /= nf * nf;
    }
    sum
}

/// Hurwitz zeta at `a = 1/2`: `ζ(s, 1/2) = (2^s - 1) ζ(s)`.
pub fn zeta_half(s: f64) -> f64 {
    let f = 2f64.powf(s) - 1.0;
    if f == 0.0 {
        0.0
    } else {
        f * zeta(s)
    }
}

/// Number of near-origin weights corrected in [`staggered_weights`].
pub const ORIGIN_CORRECTIONS: usize = 6;

/// Weights for `∫_0^∞ x^β g(x) dx` on the staggered nodes `x_i = (i + 1/2) h`,
/// `i = 0..n`, for smooth even `g` decaying before `x_n`.
///
/// The plain midpoint weights `h x_i^β` carry an error expansion
/// `Σ_m g^{(2m)}(0)/(2m)! ζ(-β-2m, 1/2) h^{β+2m+1}` from the algebraic factor at the
/// origin; the first [`ORIGIN_CORRECTIONS`] weights are adjusted so that the first
/// terms of that expansion cancel. For even integer β every correction vanishes.
pub fn staggered_weights(n: usize, h: f64, beta: f64) -> Result<Vec<f64>> {
    let mut w: Vec<f64> = (0..n).map(|i| h * ((i as f64 + 0.5) * h).powf(beta)).collect();
    let m = ORIGIN_CORRECTIONS.min(n);
    let rhs: Vec<f64> = (0..m).map(|j| -zeta_half(-beta - 2.0 * j as f64)).collect();
    if rhs.iter().all(|r| *r == 0.0) {
        return Ok(w);
    }
    let vander = DMatrix::from_fn(m, m, |row, col| (col as f64 + 0.5).powi(2 * row as i32));
    let sol = vander
        .lu()
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| DunklError::Singular("origin correction system".into()))?;
    let scale = h.powf(beta + 1.0);
    for i in 0..m {
        w[i] += scale * sol[i];
    }
    Ok(w)
}

/// Fornberg's algorithm: weights `c_i` with `f^{(order)}(x0) ≈ Σ c_i f(nodes_i)`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
