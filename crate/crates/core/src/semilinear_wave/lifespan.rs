//! Lifespan of focusing problems: windowed Picard continuation until the norm blows past a
//! threshold, with the lower bounds on `T*` and the blow-up envelope checked along the way.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::lambda_norm_inf_spectral;
use super::linear::WaveState;
use super::picard::{picard_from_state, PicardOptions, SemilinearProblem};
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanOptions {
    pub scales: Vec<f64>,
    pub t_end: f64,
    /// Largest time step inside a window.
    pub dt: f64,
    /// Blow-up is declared once `‖Λu‖ > threshold · ‖θ‖`.
    pub threshold: f64,
    /// Second threshold for the sensitivity check.
    pub low_threshold: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Windows shorter than this stop the continuation.
    pub min_window: f64,
    pub max_windows: usize,
}

impl LifespanOptions {
    pub fn new(scales: Vec<f64>, t_end: f64, dt: f64) -> Self {
        Self {
            scales,
            t_end,
            dt,
            threshold: 1e3,
            low_threshold: 1e2,
            max_iter: 60,
            tol: 1e-10,
            min_window: 1e-7,
            max_windows: 100_000,
        }
    }
}

/// How a lifespan run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LifespanOutcome {
    /// The norm crossed the divergence threshold.
    Diverged,
    /// Picard windows shrank below the minimum before the threshold was crossed.
    Stalled,
    /// `t_end` was reached.
    Censored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub scale: f64,
    /// `‖Λ_k u(0)‖_{s−1}`.
    pub theta_norm: f64,
    /// `C_cal / ‖θ‖` with `C_cal = 1/(4C)`.
    pub bound_t: f64,
    pub observed_t: f64,
    /// First crossing of the low threshold.
    pub observed_t_low: Option<f64>,
    pub outcome: LifespanOutcome,
    /// `∫_0^{observed_t} ‖Λ_k u‖_{L^∞} dt`.
    pub integral_linf: f64,
    /// `‖Λu(t)‖ ≥ C_cal/(T* − t)` at every recorded time; `None` unless the run diverged.
    pub lower_envelope_ok: Option<bool>,
    /// Extrapolated blow-up time used for the envelope.
    pub t_star: Option<f64>,
    /// `∫ ‖Λ‖_∞` over the dyadic approach intervals `[T*(1 − 2^{−j}), T*(1 − 2^{−j−1})]`.
    pub dyadic_increments: Vec<f64>,
    /// Successive dyadic increments never fall below 3/4 of the previous one.
    pub integral_unsaturated: Option<bool>,
    pub windows: usize,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub linf: Vec<f64>,
}

impl LifespanReport {
    pub fn censored(&self) -> bool {
        self.outcome == LifespanOutcome::Censored
    }

    /// `|T_low − T_obs| / T_obs`.
    pub fn threshold_sensitivity(&self) -> Option<f64> {
        match (self.outcome, self.observed_t_low) {
            (LifespanOutcome::Diverged, Some(lo)) if self.observed_t > 0.0 => {
                Some((self.observed_t - lo).abs() / self.observed_t)
            }
            _ => None,
        }
    }

    /// `observed_t ≥ bound_t`; censored runs carry no information and pass.
    pub fn respects_bound(&self) -> bool {
        self.censored() || self.observed_t >= self.bound_t
    }
}

/// CSV with one row per scale.
pub fn lifespan_csv(reports: &[LifespanReport]) -> String {
    let mut out = String::from("scale,theta_norm,bound_T,observed_T,censored,integral_Linf,envelope_ok\n");
    for r in reports {
        let env = match r.lower_envelope_ok {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{},{:.12e},{}\n",
            r.scale,
            r.theta_norm,
            r.bound_t,
            r.observed_t,
            r.censored(),
            r.integral_linf,
            env
        ));
    }
    out
}

/// Runs [`lifespan_run`] for every scale in `opts.scales`.
pub fn lifespan_experiment(
    problem: &SemilinearProblem,
    u0: &GridFunction,
    u1: &GridFunction,
    opts: &LifespanOptions,
) -> Result<Vec<LifespanReport>> {
    let data = problem.initial_state(u0, u1)?;
    opts.scales.iter().map(|&s| lifespan_run(problem, &data, s, opts)).collect()
}

fn trapezoid(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        let (t0, t1) = (times[i - 1].max(a), times[i].min(b));
        if t1 <= t0 {
            continue;
        }
        let lerp = |t: f64| {
            let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            values[i - 1] * (1.0 - w) + values[i] * w
        };
        acc += 0.5 * (t1 - t0) * (lerp(t0) + lerp(t1));
    }
    acc
}

/// Extrapolates `1/‖Λu‖` linearly through the last two samples to its zero.
fn extrapolate_blowup(times: &[f64], norms: &[f64]) -> Option<f64> {
    let n = times.len();
    if n < 2 {
        return None;
    }
    let (t0, t1) = (times[n - 2], times[n - 1]);
    let (y0, y1) = (1.0 / norms[n - 2], 1.0 / norms[n - 1]);
    let slope = (y1 - y0) / (t1 - t0);
    if slope < 0.0 && slope.is_finite() {
        Some(t1 + y1 / -slope)
    } else {
        None
    }
}

/// Windowed continuation for data `(λu_0, λu_1)`: each window is a Picard solve started from
/// the last accepted state. The window doubles after a success and halves after a
/// contraction failure, starting from the time at which `4CT‖θ‖ = 1/2`.
pub fn lifespan_run(problem: &SemilinearProblem, data: &WaveState, scale: f64, opts: &LifespanOptions) -> Result<LifespanReport> {
    if !(opts.t_end > 0.0) || !(opts.dt > 0.0) || !(opts.threshold > opts.low_threshold) || !(opts.low_threshold > 1.0)
    {
        return Err(DunklError::InvalidArgument("need t_end, dt > 0 and threshold > low_threshold > 1".into()));
    }
    let transform = problem.transform();
    let sigma = problem.sigma();
    let c = Complex64::new(scale, 0.0);
    let mut state = WaveState { u: data.u.scale(c), ut: data.ut.scale(c) };
    let theta = state.lambda_norm(sigma);
    let c_cal = if problem.constant() > 0.0 { 0.25 / problem.constant() } else { f64::INFINITY };
    let bound_t = if theta > 0.0 { c_cal / theta } else { f64::INFINITY };

    let mut times = vec![0.0];
    let mut norms = vec![theta];
    let mut linf = vec![lambda_norm_inf_spectral(transform, &state.u, &state.ut)];
    let mut t = 0.0;
    let mut window = problem.safe_time(theta).min(opts.t_end);
    let mut windows = 0;
    let mut observed_t_low = None;
    let mut outcome = LifespanOutcome::Censored;
    let high = opts.threshold * theta;
    let low = opts.low_threshold * theta;

    'outer: while t < opts.t_end * (1.0 - 1e-12) {
        if theta == 0.0 {
            break;
        }
        if windows >= opts.max_windows || window < opts.min_window {
            outcome = LifespanOutcome::Stalled;
            break;
        }
        let w = window.min(opts.t_end - t);
        let mut po = PicardOptions::new(w, opts.dt.min(w / 4.0));
        po.auto_shrink = false;
        po.max_iter = opts.max_iter;
        po.tol = opts.tol;
        match picard_from_state(problem, &state, &po) {
            Ok(run) => {
                windows += 1;
                let traj = run.trajectory;
                for (tt, st) in traj.times.iter().zip(&traj.states).skip(1) {
                    let n = st.lambda_norm(sigma);
                    times.push(t + tt);
                    norms.push(n);
                    linf.push(lambda_norm_inf_spectral(transform, &st.u, &st.ut));
                    if observed_t_low.is_none() && n > low {
                        observed_t_low = Some(t + tt);
                    }
                    if n > high {
                        outcome = LifespanOutcome::Diverged;
                        break 'outer;
                    }
                }
                t += w;
                state = traj.states.last().cloned().expect("trajectory is non-empty");
                window = 2.0 * w;
            }
            Err(DunklError::ContractionFailure { .. }) => {
                windows += 1;
                window = 0.5 * w;
            }
            Err(e) => return Err(e),
        }
    }

    let observed_t = match outcome {
        LifespanOutcome::Censored => opts.t_end,
        _ => *times.last().expect("times hold t = 0"),
    };
    let integral_linf = trapezoid(&times, &linf, 0.0, observed_t);

    let (t_star, lower_envelope_ok) = if outcome == LifespanOutcome::Diverged {
        let ts = extrapolate_blowup(&times, &norms).unwrap_or(observed_t).max(observed_t);
        let ok = times.iter().zip(&norms).filter(|(t, _)| **t < ts).all(|(t, n)| *n >= c_cal / (ts - t));
        (Some(ts), Some(ok))
    } else {
        (None, None)
    };

    let mut dyadic_increments = Vec::new();
    if let Some(ts) = t_star {
        let mut j = 0;
        loop {
            let a = ts * (1.0 - 0.5f64.powi(j));
            let b = ts * (1.0 - 0.5f64.powi(j + 1));
            if b > observed_t || j > 60 {
                break;
            }
            dyadic_increments.push(trapezoid(&times, &linf, a, b));
            j += 1;
        }
    }
    let integral_unsaturated = if dyadic_increments.len() >= 3 {
        Some(dyadic_increments.windows(2).skip(1).all(|w| w[1] >= 0.75 * w[0]))
    } else {
        None
    };

    Ok(LifespanReport {
        scale,
        theta_norm: theta,
        bound_t,
        observed_t,
        observed_t_low,
        outcome,
        integral_linf,
        lower_envelope_ok,
        t_star,
        dyadic_increments,
        integral_unsaturated,
        windows,
        times,
        norms,
        linf,
    })
}
