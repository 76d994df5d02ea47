//! Exact propagator for `∂²_t u − Δ_k u = f` in frequency, and its energy ledger.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::lambda_norm_spectral;
use crate::error::{DunklError, Result};
use crate::spectral::{sobolev_norm, SpectralField};

/// `(û, ∂_t û)` on the frequency grid.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub u: SpectralField,
    pub ut: SpectralField,
}

impl WaveState {
    pub fn zeros(like: &SpectralField) -> Self {
        Self { u: SpectralField::zeros(like.grid().clone()), ut: SpectralField::zeros(like.grid().clone()) }
    }

    /// `‖Λ_k u‖_σ`.
    pub fn lambda_norm(&self, sigma: f64) -> f64 {
        lambda_norm_spectral(&self.u, &self.ut, sigma)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let m = Complex64::new(-1.0, 0.0);
        Self { u: self.u.axpy(m, &other.u), ut: self.ut.axpy(m, &other.ut) }
    }
}

/// `(cos ωτ, sin(ωτ)/ω, ω sin ωτ)` with the `ω → 0` limit taken analytically.
fn propagator(omega: f64, tau: f64) -> (f64, f64, f64) {
    let x = omega * tau;
    let sinc = if x.abs() < 1e-4 { tau * (1.0 - x * x / 6.0 + x.powi(4) / 120.0) } else { x.sin() / omega };
    (x.cos(), sinc, omega * x.sin())
}

/// One step of length `dt`. The homogeneous part is exact per mode; the Duhamel integral
/// uses the trapezoidal rule on `source = (f̂(t), f̂(t + dt))`.
pub fn linear_wave_step(state: &WaveState, source: Option<(&SpectralField, &SpectralField)>, dt: f64) -> WaveState {
    let grid = state.u.grid();
    let mut u = state.u.coeffs().to_vec();
    let mut ut = state.ut.coeffs().to_vec();
    for (i, r2) in grid.norms_sq().iter().enumerate() {
        let (c, sc, ws) = propagator(r2.sqrt(), dt);
        let (a, b) = (u[i], ut[i]);
        u[i] = a * c + b * sc;
        ut[i] = b * c - a * ws;
        if let Some((f0, f1)) = source {
            let (g0, g1) = (f0.coeffs()[i], f1.coeffs()[i]);
            u[i] += 0.5 * dt * sc * g0;
            ut[i] += 0.5 * dt * (c * g0 + g1);
        }
    }
    WaveState {
        u: SpectralField::new(grid.clone(), u).unwrap_or_else(|_| nan_field(&state.u)),
        ut: SpectralField::new(grid.clone(), ut).unwrap_or_else(|_| nan_field(&state.u)),
    }
}

fn nan_field(like: &SpectralField) -> SpectralField {
    let mut f = SpectralField::zeros(like.grid().clone());
    for c in f.coeffs_mut() {
        *c = Complex64::new(f64::NAN, f64::NAN);
    }
    f
}

/// States at uniformly spaced times, with the sources used to produce them.
#[derive(Debug, Clone)]
pub struct WaveTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    /// `f̂` at every time, when the problem is forced.
    pub sources: Option<Vec<SpectralField>>,
}

impl WaveTrajectory {
    pub fn final_state(&self) -> &WaveState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn lambda_norms(&self, sigma: f64) -> Vec<f64> {
        self.states.iter().map(|s| s.lambda_norm(sigma)).collect()
    }
}

/// Number of equal steps of length at most `dt` covering `t_end`.
pub(crate) fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(DunklError::InvalidArgument(format!("need dt > 0 and t_end ≥ 0, got {dt}, {t_end}")));
    }
    Ok(((t_end / dt) - 1e-9).ceil().max(1.0) as usize)
}

/// Solves the linear problem on `[0, t_end]` with a known forcing `f̂(t)`.
pub fn solve_linear_wave(
    initial: WaveState,
    source: Option<&dyn Fn(f64) -> SpectralField>,
    t_end: f64,
    dt: f64,
) -> Result<WaveTrajectory> {
    let steps = step_count(t_end, dt)?;
    let h = t_end / steps as f64;
    let mut times = vec![0.0];
    let mut sources = source.map(|f| vec![f(0.0)]);
    let mut states = vec![initial];
    for i in 0..steps {
        let t1 = (i + 1) as f64 * h;
        let next = match (&mut sources, source) {
            (Some(fs), Some(f)) => {
                let f1 = f(t1);
                let s = linear_wave_step(&states[i], Some((&fs[i], &f1)), h);
                fs.push(f1);
                s
            }
            _ => linear_wave_step(&states[i], None, h),
        };
        times.push(t1);
        states.push(next);
    }
    Ok(WaveTrajectory { times, states, sources })
}

/// `‖Λ_k u(t)‖_σ` next to `‖θ‖_σ + ∫_0^t ‖f̂‖_σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveEnergyLedger {
    pub sigma: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
    /// `max_t |‖Λu(t)‖ − ‖θ‖| / ‖θ‖`.
    pub relative_drift: f64,
    /// Whether `norm ≤ bound (1 + 1e−9)` at every time.
    pub inequality_holds: bool,
}

impl WaveEnergyLedger {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lambda_norm,bound\n");
        for ((t, n), b) in self.times.iter().zip(&self.norms).zip(&self.bounds) {
            out.push_str(&format!("{t:.6},{n:.12e},{b:.12e}\n"));
        }
        out
    }
}

/// Energy ledger of a trajectory at Sobolev index `σ = s − 1`. The source integral uses the
/// trapezoidal rule.
pub fn energy_check(trajectory: &WaveTrajectory, sigma: f64) -> WaveEnergyLedger {
    let norms = trajectory.lambda_norms(sigma);
    let theta = norms[0];
    let mut bounds = Vec::with_capacity(norms.len());
    let mut acc = theta;
    bounds.push(acc);
    if let Some(fs) = &trajectory.sources {
        let fnorm: Vec<f64> = fs.iter().map(|f| sobolev_norm(f, sigma)).collect();
        for i in 1..norms.len() {
            acc += 0.5 * (trajectory.times[i] - trajectory.times[i - 1]) * (fnorm[i - 1] + fnorm[i]);
            bounds.push(acc);
        }
    } else {
        bounds.resize(norms.len(), theta);
    }
    let relative_drift = if theta > 0.0 {
        norms.iter().map(|n| (n - theta).abs() / theta).fold(0.0, f64::max)
    } else {
        norms.iter().copied().fold(0.0, f64::max)
    };
    let inequality_holds = norms.iter().zip(&bounds).all(|(n, b)| *n <= b * (1.0 + 1e-9) + 1e-300);
    WaveEnergyLedger { sigma, times: trajectory.times.clone(), norms, bounds, relative_drift, inequality_holds }
}
