//! Picard iteration with dyadic data cutoffs for `∂²_t u − Δ_k u = Q(Λ_k u, Λ_k u)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::form::{nonlinearity, QuadraticFormQ};
use super::linear::{linear_wave_step, step_count, WaveState, WaveTrajectory};
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;
use crate::spectral::{calibrate_algebra_constant, cutoff_smooth, AlgebraCalibration, DunklTransform, SpectralField};

/// Random pairs used to calibrate the algebra constant.
pub const CALIBRATION_PAIRS: usize = 40;
pub const CALIBRATION_SEED: u64 = 0xA16;

/// A transform, a nonlinearity and a regularity index, with the calibrated product constant.
#[derive(Debug, Clone)]
pub struct SemilinearProblem<'a> {
    transform: &'a DunklTransform,
    q: QuadraticFormQ,
    s: f64,
    calibration: AlgebraCalibration,
}

impl<'a> SemilinearProblem<'a> {
    /// Checks `s > γ + d/2 + 1` and that the spatial grid resolves products of band-limited
    /// fields (`π/h ≥ 2Ξ`), then calibrates `C_alg` at index `s − 1`.
    pub fn new(transform: &'a DunklTransform, q: QuadraticFormQ, s: f64) -> Result<Self> {
        let grid = transform.spatial();
        let d = grid.dim();
        if q.dim() != d {
            return Err(DunklError::InvalidArgument(format!("q is for dimension {}, grid has {d}", q.dim())));
        }
        let gamma = grid.ctx().gamma();
        let min_s = gamma + d as f64 / 2.0 + 1.0;
        if !(s > min_s) {
            return Err(DunklError::InvalidArgument(format!("need s > γ + d/2 + 1 = {min_s}, got {s}")));
        }
        let nyquist = PI / grid.spacing();
        let band = transform.frequency().max_radius() * (d as f64).sqrt();
        if nyquist < 2.0 * band {
            return Err(DunklError::InvalidGrid(format!(
                "spatial grid resolves |ξ| ≤ {nyquist:.3}, products need {:.3}",
                2.0 * band
            )));
        }
        let calibration = calibrate_algebra_constant(transform, s - 1.0, CALIBRATION_PAIRS, CALIBRATION_SEED)?;
        Ok(Self { transform, q, s, calibration })
    }

    /// Reuses an existing calibration.
    pub fn with_calibration(mut self, calibration: AlgebraCalibration) -> Self {
        self.calibration = calibration;
        self
    }

    pub fn transform(&self) -> &'a DunklTransform {
        self.transform
    }

    pub fn q(&self) -> &QuadraticFormQ {
        &self.q
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Sobolev index of `Λ_k u`.
    pub fn sigma(&self) -> f64 {
        self.s - 1.0
    }

    pub fn calibration(&self) -> &AlgebraCalibration {
        &self.calibration
    }

    /// `C = C_alg ‖|q|‖₂`.
    pub fn constant(&self) -> f64 {
        self.calibration.constant * self.q.abs_norm()
    }

    /// Largest `T` with `4CT‖θ‖ ≤ 1/2`.
    pub fn safe_time(&self, theta: f64) -> f64 {
        let c = self.constant();
        if c * theta > 0.0 {
            1.0 / (8.0 * c * theta)
        } else {
            f64::INFINITY
        }
    }

    /// `(û_0, û_1)` from grid data.
    pub fn initial_state(&self, u0: &GridFunction, u1: &GridFunction) -> Result<WaveState> {
        Ok(WaveState { u: self.transform.forward(u0)?, ut: self.transform.forward(u1)? })
    }

    /// `Q(Λu, Λu)` in frequency.
    pub fn source(&self, state: &WaveState) -> Option<SpectralField> {
        nonlinearity(self.transform, &self.q, &state.u, &state.ut)
    }

    fn saturation_level(&self) -> i32 {
        let rmax = self.transform.frequency().norms_sq().iter().copied().fold(0.0, f64::max).sqrt();
        let mut level = 0;
        while 2f64.powi(level - 1) < rmax {
            level += 1;
        }
        level
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub t_end: f64,
    pub dt: f64,
    pub max_iter: usize,
    /// Convergence when `ρ_n ≤ tol · ‖θ‖`.
    pub tol: f64,
    /// Shrink `T` to the margin-two time when `4CT‖θ‖ ≥ 1`.
    pub auto_shrink: bool,
    /// Iterate `u_{n+1}` uses `S_{cutoff_start + n}`; the standard scheme is `cutoff_start = 1`.
    pub cutoff_start: i32,
}

impl PicardOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self { t_end, dt, max_iter: 40, tol: 1e-10, auto_shrink: true, cutoff_start: 1 }
    }
}

/// Convergence record of one Picard solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardHistory {
    pub theta_norm: f64,
    pub constant: f64,
    pub t_requested: f64,
    pub t_used: f64,
    pub shrunk: bool,
    /// `4CT‖θ‖` at the time actually used.
    pub predicted_ratio: f64,
    /// `ρ_n = sup_t ‖Λ(u_{n+1} − u_n)(t)‖_{s−1}`, starting with `u_0 ≡ 0`.
    pub differences: Vec<f64>,
    /// `sup_t ‖Λu_n(t)‖_{s−1}` for `n ≥ 1`.
    pub sup_norms: Vec<f64>,
    /// `ρ_{n+1}/ρ_n` over iterations whose data cutoffs no longer change on the grid.
    pub ratios: Vec<f64>,
    pub contraction_ratio: Option<f64>,
    /// Every iterate satisfies `sup_t ‖Λu_n‖ ≤ 2‖θ‖`.
    pub bound_holds: bool,
    pub iterations: usize,
    pub converged: bool,
}

impl PicardHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rho,sup_norm\n");
        for (n, (r, s)) in self.differences.iter().zip(&self.sup_norms).enumerate() {
            out.push_str(&format!("{n},{r:.12e},{s:.12e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub trajectory: WaveTrajectory,
    pub history: PicardHistory,
}

/// Picard iteration on `[0, T]` from grid data. `T` is shrunk (and the shrink recorded) when
/// `4CT‖θ‖ ≥ 1` and `opts.auto_shrink` is set.
pub fn picard_solve(
    problem: &SemilinearProblem,
    u0: &GridFunction,
    u1: &GridFunction,
    opts: &PicardOptions,
) -> Result<PicardRun> {
    let data = problem.initial_state(u0, u1)?;
    picard_from_state(problem, &data, opts)
}

/// [`picard_solve`] from spectral data.
pub fn picard_from_state(problem: &SemilinearProblem, data: &WaveState, opts: &PicardOptions) -> Result<PicardRun> {
    let sigma = problem.sigma();
    let theta = data.lambda_norm(sigma);
    let c = problem.constant();
    let mut t_used = opts.t_end;
    let mut shrunk = false;
    if opts.auto_shrink && 4.0 * c * opts.t_end * theta >= 1.0 {
        t_used = problem.safe_time(theta);
        shrunk = true;
    }
    let steps = step_count(t_used, opts.dt)?;
    let h = t_used / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    let predicted_ratio = 4.0 * c * t_used * theta;
    let failure = |iterations| DunklError::ContractionFailure { iterations, margin_violated: predicted_ratio >= 1.0 };

    let saturation = problem.saturation_level();
    let floor = theta.max(f64::MIN_POSITIVE);
    let mut prev: Vec<WaveState> = vec![WaveState::zeros(&data.u); steps + 1];
    let mut sources: Vec<SpectralField> = vec![SpectralField::zeros(data.u.grid().clone()); steps + 1];
    let mut differences = Vec::new();
    let mut sup_norms = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for n in 0..opts.max_iter {
        iterations = n + 1;
        let level = opts.cutoff_start + n as i32;
        let start = WaveState { u: cutoff_smooth(level, &data.u), ut: cutoff_smooth(level, &data.ut) };
        if n > 0 {
            for (f, st) in sources.iter_mut().zip(&prev) {
                *f = problem.source(st).ok_or_else(|| failure(iterations))?;
            }
        }
        let mut next = Vec::with_capacity(steps + 1);
        next.push(start);
        for i in 0..steps {
            let s = linear_wave_step(&next[i], Some((&sources[i], &sources[i + 1])), h);
            next.push(s);
        }
        let mut rho = 0.0f64;
        let mut sup = 0.0f64;
        for (a, b) in next.iter().zip(&prev) {
            rho = rho.max(a.difference(b).lambda_norm(sigma));
            sup = sup.max(a.lambda_norm(sigma));
        }
        if !rho.is_finite() || !sup.is_finite() {
            return Err(failure(iterations));
        }
        if let Some(&last) = differences.last() {
            if level > saturation && last > 1e-11 * floor && rho > 1e-13 * floor {
                ratios.push(rho / last);
            }
        }
        differences.push(rho);
        sup_norms.push(sup);
        prev = next;
        if rho <= opts.tol * floor && level >= saturation {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(failure(iterations));
    }
    for (f, st) in sources.iter_mut().zip(&prev) {
        *f = problem.source(st).ok_or_else(|| failure(iterations))?;
    }
    let contraction_ratio = if ratios.is_empty() { None } else { Some(ratios.iter().copied().fold(0.0, f64::max)) };
    let bound_holds = sup_norms.iter().all(|&s| s <= 2.0 * theta * (1.0 + 1e-12));
    let history = PicardHistory {
        theta_norm: theta,
        constant: c,
        t_requested: opts.t_end,
        t_used,
        shrunk,
        predicted_ratio,
        differences,
        sup_norms,
        ratios,
        contraction_ratio,
        bound_holds,
        iterations,
        converged,
    };
    let trajectory = WaveTrajectory { times, states: prev, sources: Some(sources) };
    Ok(PicardRun { trajectory, history })
}
