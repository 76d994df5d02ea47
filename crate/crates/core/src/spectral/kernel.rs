//! Series evaluation of the one-dimensional Dunkl kernel and its tensor products.
//!
//! The sum `Σ (xz)^n / b_n` is accumulated in double-double arithmetic, so the heavy
//! cancellation for imaginary arguments (`|K| ≤ 1` while terms reach `e^{|xz|}`) costs
//! nothing visible at the working precision.

use num_complex::Complex64;

use crate::error::{DunklError, Result};

/// Largest `|xz|` accepted by default.
pub const DEFAULT_SERIES_CAP: f64 = 50.0;

const MAX_TERMS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let (t, f) = Self::two_sum(self.lo, o.lo);
        let r = Self::quick_two_sum(s, e + t);
        Self::quick_two_sum(r.hi, r.lo + f)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Self::quick_two_sum(p, e + self.lo * b)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn div_dd(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self.sub(b.mul_f64(q1));
        let q2 = r.hi / b.hi;
        let r = r.sub(b.mul_f64(q2));
        let q3 = r.hi / b.hi;
        Self::quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Denominators `b_n = Π_{m≤n} c_m`, `c_m = m + k(1 − (−1)^m)`, stored as the factors `c_m`.
///
/// The factors are kept exactly in double-double form: a rounded `m + 2k` would be
/// amplified by the size of the largest term.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    k: f64,
    factors: Vec<Dd>,
    cap: f64,
}

impl KernelSeries {
    pub fn new(k: f64) -> Result<Self> {
        Self::with_cap(k, DEFAULT_SERIES_CAP)
    }

    pub fn with_cap(k: f64, cap: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(DunklError::InvalidArgument(format!("multiplicity must be ≥ 0, got {k}")));
        }
        if !(cap > 0.0) {
            return Err(DunklError::InvalidArgument("series cap must be positive".into()));
        }
        let factors = (1..=MAX_TERMS)
            .map(|m| {
                if m % 2 == 1 {
                    let (s, e) = Dd::two_sum(m as f64, 2.0 * k);
                    Dd::quick_two_sum(s, e)
                } else {
                    Dd::from_f64(m as f64)
                }
            })
            .collect();
        Ok(Self { k, factors, cap })
    }

    pub fn multiplicity(&self) -> f64 {
        self.k
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `c_m` for `m ≥ 1`.
    pub fn factor(&self, m: usize) -> f64 {
        self.factors[m - 1].to_f64()
    }

    /// `K(x, z)` for real `x` and complex `z`.
    pub fn eval(&self, x: f64, z: Complex64) -> Result<Complex64> {
        self.eval_product(Complex64::new(x, 0.0) * z)
    }

    /// The kernel as a function of the product `w = xz`.
    pub fn eval_product(&self, w: Complex64) -> Result<Complex64> {
        let r = w.norm();
        if !r.is_finite() {
            return Err(DunklError::InvalidArgument("non-finite kernel argument".into()));
        }
        if r > self.cap {
            return Err(DunklError::Range { value: r, cap: self.cap });
        }
        let (u, v) = (w.re, w.im);
        let (mut tr, mut ti) = (Dd::from_f64(1.0), Dd::ZERO);
        let (mut sr, mut si) = (tr, ti);
        for (n, &c) in self.factors.iter().enumerate() {
            let nr = tr.mul_f64(u).add(ti.mul_f64(v).neg());
            let ni = tr.mul_f64(v).add(ti.mul_f64(u));
            tr = nr.div_dd(c);
            ti = ni.div_dd(c);
            sr = sr.add(tr);
            si = si.add(ti);
            let term = tr.hi.hypot(ti.hi);
            let sum = sr.hi.hypot(si.hi);
            if (n + 1) as f64 > r && term <= 1e-17 * sum.max(f64::MIN_POSITIVE) {
                return Ok(Complex64::new(sr.to_f64(), si.to_f64()));
            }
        }
        Err(DunklError::NonTermination { cap: MAX_TERMS })
    }
}

/// `K(x, z)` in one dimension with the default series cap.
pub fn kernel_1d(x: f64, z: Complex64, k: f64) -> Result<Complex64> {
    KernelSeries::new(k)?.eval(x, z)
}

/// `K(x, z) = Π_j K_{k_j}(x_j, z_j)` for `Z₂^d`.
pub fn kernel_zd(x: &[f64], z: &[Complex64], k: &[f64]) -> Result<Complex64> {
    if x.len() != z.len() || x.len() != k.len() {
        return Err(DunklError::InvalidArgument("kernel argument dimensions differ".into()));
    }
    let mut out = Complex64::new(1.0, 0.0);
    for ((&xj, &zj), &kj) in x.iter().zip(z).zip(k) {
        out *= kernel_1d(xj, zj, kj)?;
    }
    Ok(out)
}

/// Rows `x, y, Re K(x, −iy), Im K(x, −iy)` on a square table, as CSV text.
pub fn kernel_table_csv(k: f64, xs: &[f64], ys: &[f64]) -> Result<String> {
    let series = KernelSeries::new(k)?;
    let mut out = String::from("x,y,re,im\n");
    for &x in xs {
        for &y in ys {
            let v = series.eval(x, Complex64::new(0.0, -y))?;
            out.push_str(&format!("{x},{y},{:.17e},{:.17e}\n", v.re, v.im));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalisation_and_classical_case() {
        for k in [0.0, 0.4, 1.7] {
            assert_eq!(kernel_1d(3.2, c(0.0, 0.0), k).unwrap(), c(1.0, 0.0));
            assert_eq!(kernel_1d(0.0, c(2.0, -1.0), k).unwrap(), c(1.0, 0.0));
        }
        let e = kernel_1d(1.0, c(1.0, 0.0), 0.0).unwrap();
        assert!((e.re - std::f64::consts::E).abs() < 1e-15);
        let w = kernel_1d(7.0, c(0.0, -3.0), 0.0).unwrap();
        assert!((w - c(21.0f64.cos(), -(21.0f64.sin()))).norm() < 1e-15);
    }

    #[test]
    fn closed_form_at_unit_multiplicity() {
        // k = 1: even part sin t / t, t = xy
        let k = 1.0;
        for t in [0.3, 2.0, 11.0, 37.5] {
            let v = kernel_1d(t, c(0.0, -1.0), k).unwrap();
            assert!((v.re - t.sin() / t).abs() < 1e-15, "t={t}");
            // odd part: −i (sin t / t² − cos t / t)
            let odd = t.sin() / (t * t) - t.cos() / t;
            assert!((v.im + odd).abs() < 1e-15, "t={t}");
        }
    }

    #[test]
    fn large_arguments_with_fractional_multiplicity() {
        // 60-digit reference sums of the same series
        for (k, t, re, im) in [
            (0.4, 35.0, -0.188_447_368_572_113_91, -0.033_948_898_036_366_82),
            (0.9, 47.0, -0.000_941_309_618_290_415_2, -0.029_176_105_312_054_338),
        ] {
            let v = kernel_1d(t, c(0.0, -1.0), k).unwrap();
            assert!((v - c(re, im)).norm() < 1e-13, "k={k} t={t} {v}");
        }
    }

    #[test]
    fn range_error_beyond_cap() {
        let err = kernel_1d(10.0, c(0.0, 6.0), 0.5).unwrap_err();
        assert!(matches!(err, DunklError::Range { .. }));
        assert!(kernel_1d(1.0, c(0.0, 0.0), -0.1).is_err());
    }

    #[test]
    fn symmetry_on_real_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..2.0)).collect();
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let zx: Vec<Complex64> = x.iter().map(|&v| c(v, 0.0)).collect();
            let zy: Vec<Complex64> = y.iter().map(|&v| c(v, 0.0)).collect();
            let a = kernel_zd(&x, &zy, &k).unwrap();
            let b = kernel_zd(&y, &zx, &k).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn defining_relation_by_finite_differences() {
        // T_x K(·, z) = z K(·, z)
        let h = 1e-3;
        for k in [0.0, 0.35, 1.2] {
            for (x, z) in [(0.8, c(0.0, 1.7)), (-1.3, c(0.6, -0.4)), (2.1, c(0.0, -2.5))] {
                let f = |t: f64| kernel_1d(t, z, k).unwrap();
                let d = (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * 8.0) / (12.0 * h);
                let t = d + (f(x) - f(-x)) * (k / x);
                assert!((t - z * f(x)).norm() < 1e-8, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn imaginary_arguments_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let k = rng.gen_range(0.0..2.0);
            let x = rng.gen_range(-6.0..6.0);
            let y = rng.gen_range(-6.0..6.0);
            let v = kernel_1d(x, c(0.0, -y), k).unwrap();
            assert!(v.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn table_has_one_row_per_pair() {
        let csv = kernel_table_csv(0.5, &[0.0, 1.0], &[0.5, 1.5, 2.5]).unwrap();
        assert_eq!(csv.lines().count(), 7);
    }
}
