//! Fourier multipliers, translation, convolution and Sobolev norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transform::{DunklTransform, SpectralField};
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;

/// `ℱ(T_j f) = iξ_j ℱf`.
pub fn spectral_derivative(j: usize, f: &SpectralField) -> SpectralField {
    f.multiply(|xi, _| Complex64::new(0.0, xi[j]))
}

/// `J_n`: multiplication by the indicator of `‖ξ‖ ≤ n`.
pub fn cutoff_sharp(n: f64, f: &SpectralField) -> SpectralField {
    let n2 = n * n;
    f.multiply(|_, r2| if r2 <= n2 && n > 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Radial bump: 1 on `‖ξ‖ ≤ 1/2`, `exp(1 − 1/(1 − ρ²))` with `ρ = 2‖ξ‖ − 1` on the shell, 0 beyond 1.
pub fn psi(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let rho = 2.0 * r - 1.0;
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

/// `S_n`: multiplication by `ψ(2^{−n} ξ)`.
pub fn cutoff_smooth(n: i32, f: &SpectralField) -> SpectralField {
    let s = 2f64.powi(-n);
    f.multiply(|_, r2| Complex64::new(psi(s * r2.sqrt()), 0.0))
}

/// `(∫ (1 + ‖ξ‖²)^s |F|² ω_k dξ)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let g = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| g.grid().weight(i) * (1.0 + g.norms_sq()[i]).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖f‖_{H^s_k}` for a grid function.
pub fn sobolev_norm_grid(t: &DunklTransform, f: &GridFunction, s: f64) -> Result<f64> {
    Ok(sobolev_norm(&t.forward(f)?, s))
}

/// Generalised translation `τ_y f = ℱ^{-1}(K(i·, y) ℱf)`.
pub fn translate(t: &DunklTransform, y: &[f64], f: &GridFunction) -> Result<GridFunction> {
    if y.len() != f.grid().dim() {
        return Err(DunklError::InvalidArgument("translation vector has wrong dimension".into()));
    }
    let kern = t.kernel_on_frequencies(y)?;
    let mut ff = t.forward(f)?;
    for (c, k) in ff.coeffs_mut().iter_mut().zip(kern) {
        *c *= k;
    }
    t.inverse(&ff)
}

/// `f ∗_k g = ℱ^{-1}(ℱf · ℱg)`.
pub fn convolve(t: &DunklTransform, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let prod = t.forward(f)?.product(&t.forward(g)?);
    t.inverse(&prod)
}

/// Outcome of the empirical algebra-constant calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraCalibration {
    pub s: f64,
    pub constant: f64,
    /// Maxima over the two halves of the random family.
    pub half_maxima: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

impl AlgebraCalibration {
    /// The two halves agree within a factor of two.
    pub fn is_stable(&self) -> bool {
        let (a, b) = self.half_maxima;
        a.max(b) <= 2.0 * a.min(b)
    }
}

/// Smooth random test function: a few off-centre Gaussian bumps with polynomial tilt.
///
/// Widths and centres are kept close to the standard Gaussian, which decays about equally
/// fast in space and frequency and so suits grids with `L·Ξ` near the kernel cap.
pub fn random_bump(rng: &mut impl Rng, dim: usize) -> impl Fn(&[f64]) -> f64 {
    let terms: Vec<(Vec<f64>, f64, f64, Vec<f64>)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let c = (0..dim).map(|_| rng.gen_range(-0.7..0.7)).collect();
            let a = rng.gen_range(-1.0..1.0);
            let w = rng.gen_range(1.0..1.2);
            let tilt = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            (c, a, w, tilt)
        })
        .collect();
    move |x: &[f64]| {
        terms
            .iter()
            .map(|(c, a, w, tilt)| {
                let r2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                let lin: f64 = x.iter().zip(tilt).map(|(xi, ti)| xi * ti).sum();
                a * (1.0 + lin) * (-0.5 * r2 / (w * w)).exp()
            })
            .sum()
    }
}

/// Largest observed `‖uv‖_{H^s} / (‖u‖_{H^s} ‖v‖_{H^s})` over a seeded random family of pairs.
pub fn calibrate_algebra_constant(t: &DunklTransform, s: f64, pairs: usize, seed: u64) -> Result<AlgebraCalibration> {
    if pairs < 2 {
        return Err(DunklError::InvalidArgument("need at least two pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = t.spatial().clone();
    let dim = grid.dim();
    let mut ratios = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let u = GridFunction::from_fn(grid.clone(), random_bump(&mut rng, dim))?;
        let v = GridFunction::from_fn(grid.clone(), random_bump(&mut rng, dim))?;
        let uv = u.zip_with(&v, |a, b| a * b);
        let nu = sobolev_norm_grid(t, &u, s)?;
        let nv = sobolev_norm_grid(t, &v, s)?;
        if nu == 0.0 || nv == 0.0 {
            continue;
        }
        ratios.push(sobolev_norm_grid(t, &uv, s)? / (nu * nv));
    }
    let half = ratios.len() / 2;
    let max = |r: &[f64]| r.iter().copied().fold(0.0, f64::max);
    let a = max(&ratios[..half]);
    let b = max(&ratios[half..]);
    Ok(AlgebraCalibration { s, constant: a.max(b), half_maxima: (a, b), samples: ratios.len(), seed })
}
