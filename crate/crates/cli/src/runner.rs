//! Runs a configuration and writes its CSV outputs and manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dunkl::grid::GridFunction;
use dunkl::root_systems::{RootSystem, WeightContext};
use dunkl::semilinear_wave::{
    energy_check, lifespan_csv, lifespan_run, picard_solve, solve_linear_wave, LifespanOptions, PicardOptions,
    QuadraticFormQ, SemilinearProblem,
};
use dunkl::spectral::{build_transform, random_bump, spectral_derivative, DunklTransform};
use dunkl::symmetric_systems::{
    build_system, bump_wave_data, default_initial_data, friedrichs_solve, matrix_sqrt, propagation_experiment,
    verify_energy_estimate, wave_to_system, CoefficientField, ConeOptions, FirstOrderTerms, FriedrichsOptions,
    SymmetricSystemSpec, WaveSampling, ENERGY_TOLERANCE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::ExperimentError;

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "DUNKL_THREADS";

/// Relative tolerance for inversion and Plancherel on random bumps.
pub const TRANSFORM_TOLERANCE: f64 = 1e-5;

/// Energy drift allowed for the free wave.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Relative change of the lifespan between the two blow-up thresholds.
pub const SENSITIVITY_TOLERANCE: f64 = 0.05;

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on up to `threads` scoped threads, keeping input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Calibrated constants of the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub inverse_constant: f64,
    pub closed_form_inverse_constant: f64,
    pub plancherel_constant: f64,
    pub calibration_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    /// `(s, λ_s)` per ledger order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambda_s: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub config_sha256: String,
    pub version: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub constants: Constants,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Rejects data that has not decayed at the grid edge.
    pub strict: bool,
    pub threads: usize,
}

/// Scenario output before it is written.
#[derive(Default)]
struct Outcome {
    files: Vec<(String, String)>,
    checks: Vec<Check>,
    constants: Constants,
}

/// SHA-256 of the canonical TOML form.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| ExperimentError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| ExperimentError::io(path, e))
}

/// Validates, runs and writes `cfg`; the manifest is written last.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let outcome = match cfg.scenario {
        Scenario::TransformValidation => transform_validation(cfg, opts)?,
        Scenario::SymmetricSystem | Scenario::WaveReduction => symmetric_system(cfg, opts)?,
        Scenario::Propagation => propagation(cfg)?,
        Scenario::FreeWaveEnergy => free_wave_energy(cfg)?,
        Scenario::Picard => picard(cfg)?,
        Scenario::Lifespan => lifespan(cfg, opts)?,
    };
    fs::create_dir_all(&opts.out_dir).map_err(|e| ExperimentError::io(&opts.out_dir, e))?;
    for (name, body) in &outcome.files {
        write_atomic(&opts.out_dir.join(name), body)?;
    }
    let passed = outcome.checks.iter().all(|c| c.passed);
    let manifest = RunManifest {
        name: cfg.name.clone(),
        scenario: cfg.scenario,
        seed: cfg.seed,
        config_sha256: config_hash(cfg)?,
        version: env!("CARGO_PKG_VERSION").into(),
        threads: opts.threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        constants: outcome.constants,
        files: outcome.files.into_iter().map(|(n, _)| n).collect(),
        checks: outcome.checks,
        passed,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_atomic(&opts.out_dir.join("manifest.json"), &json)?;
    Ok(manifest)
}

fn transform_for(cfg: &ExperimentConfig) -> Result<DunklTransform, ExperimentError> {
    let ctx = WeightContext::new(RootSystem::z2_power(&cfg.root_system.multiplicities)?)?;
    let g = &cfg.grid;
    Ok(build_transform(&ctx, g.half_nodes, g.spacing, g.freq_half_nodes, g.max_frequency)?)
}

fn constants_of(t: &DunklTransform) -> Constants {
    let m = t.manifest();
    Constants {
        inverse_constant: m.inverse_constant,
        closed_form_inverse_constant: m.closed_form_inverse_constant,
        plancherel_constant: m.plancherel_constant,
        calibration_residual: m.calibration_residual,
        ..Constants::default()
    }
}

fn gaussian(x: &[f64]) -> f64 {
    (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

fn transform_validation(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?.strict(opts.strict);
    let d = cfg.dim();
    let count = cfg.transform.as_ref().expect("validated").functions;
    let p = t.plancherel_constant();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("i,inversion_error,plancherel_error\n");
    let (mut inv_max, mut pl_max) = (0.0f64, 0.0f64);
    for i in 0..count {
        let f = GridFunction::from_fn(t.spatial().clone(), random_bump(&mut rng, d))?;
        let ff = t.forward(&f)?;
        let back = t.inverse(&ff)?;
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        let inv = f.values().iter().zip(back.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        let pl = (ff.l2_norm().powi(2) / f.l2_norm().powi(2) / p - 1.0).abs();
        inv_max = inv_max.max(inv);
        pl_max = pl_max.max(pl);
        csv.push_str(&format!("{i},{inv:.6e},{pl:.6e}\n"));
    }
    let mut checks = vec![
        Check::new("inversion", inv_max < TRANSFORM_TOLERANCE, format!("max relative error {inv_max:.3e}")),
        Check::new("plancherel", pl_max < TRANSFORM_TOLERANCE, format!("max relative error {pl_max:.3e}")),
    ];
    let (m, mc) = (t.inverse_constant(), t.closed_form_inverse_constant());
    checks.push(Check::new(
        "inverse-constant-closed-form",
        ((m - mc) / mc).abs() < TRANSFORM_TOLERANCE,
        format!("calibrated {m:.10} against {mc:.10}"),
    ));
    if cfg.root_system.multiplicities.iter().all(|&k| k == 0.0) {
        let classical = (2.0 * std::f64::consts::PI).powi(d as i32);
        let err = (p - classical).abs() / classical;
        checks.push(Check::new(
            "classical-plancherel-constant",
            err < TRANSFORM_TOLERANCE,
            format!("constant {p:.10} against (2π)^d = {classical:.10}"),
        ));
    }
    Ok(Outcome { files: vec![("transform.csv".into(), csv)], checks, constants: constants_of(&t) })
}

fn gaussian_data(t: &DunklTransform, components: usize) -> Result<Vec<GridFunction>, ExperimentError> {
    let g = GridFunction::from_fn(t.spatial().clone(), gaussian)?;
    Ok(vec![g; components])
}

/// Wave data at rest: `u` Gaussian, `∂_t u = 0`, `w = √A T u`.
fn wave_rest_data(t: &DunklTransform, a: &CoefficientField) -> Result<Vec<GridFunction>, ExperimentError> {
    let d = t.spatial().dim();
    let u = GridFunction::from_fn(t.spatial().clone(), gaussian)?;
    let uh = t.forward(&u)?;
    let tu: Vec<GridFunction> =
        (0..d).map(|j| t.inverse(&spectral_derivative(j, &uh))).collect::<Result<_, _>>()?;
    let b = matrix_sqrt(&a.eval(0.0, &vec![0.0; d]))?;
    let mut out = vec![u, GridFunction::zeros(t.spatial().clone())];
    for j in 0..d {
        let mut w = GridFunction::zeros(t.spatial().clone());
        for (l, tl) in tu.iter().enumerate() {
            let c = b[(j, l)];
            w = w.zip_with(tl, |x, y| x + c * y);
        }
        out.push(w);
    }
    Ok(out)
}

/// System, initial data, truncation radius, CFL factor and Sobolev orders.
type SystemSetup = (SymmetricSystemSpec, Vec<GridFunction>, f64, f64, Vec<usize>);

fn system_and_data(
    cfg: &ExperimentConfig,
    t: &DunklTransform,
) -> Result<SystemSetup, ExperimentError> {
    let ctx = t.spatial().ctx().clone();
    if let Some(w) = &cfg.wave {
        let a = CoefficientField::from_rows(&w.a);
        let terms = if w.damping > 0.0 { FirstOrderTerms::damping(w.damping) } else { FirstOrderTerms::none() };
        let spec = wave_to_system(ctx, a.clone(), terms, WaveSampling::new(t.spatial().extent()))?;
        let data = wave_rest_data(t, &a)?;
        return Ok((spec, data, w.truncation, 0.5, w.orders.clone()));
    }
    let b = cfg.system.as_ref().expect("validated");
    let (spec, data) = match (&b.preset, &b.coefficients) {
        (Some(p), _) => (build_system(p, ctx)?, default_initial_data(p, t)?),
        (None, Some(c)) => {
            let fields = c.iter().map(|m| CoefficientField::from_rows(m)).collect();
            let spec = SymmetricSystemSpec::new(ctx, fields, None, t.spatial().extent())?;
            let data = gaussian_data(t, spec.components())?;
            (spec, data)
        }
        (None, None) => unreachable!("validated"),
    };
    Ok((spec, data, b.truncation, b.cfl, b.orders.clone()))
}

fn symmetric_system(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?;
    let (spec, data, n, cfl, orders) = system_and_data(cfg, &t)?;
    let runs = par_map(&orders, opts.threads, |&s| {
        let mut o = FriedrichsOptions::new(n, cfg.time.dt, cfg.time.t_end);
        o.outputs = cfg.time.outputs;
        o.s = s;
        o.cfl = cfl;
        friedrichs_solve(&spec, &t, &data, &o)
    });
    let mut out = Outcome { constants: constants_of(&t), ..Outcome::default() };
    for (s, run) in orders.iter().zip(runs) {
        let run = run?;
        let report = verify_energy_estimate(&run.ledger, ENERGY_TOLERANCE);
        out.checks.push(Check::new(
            format!("energy-inequality-s{s}"),
            report.passed,
            format!("largest norm/bound {:.6}, λ_s = {:.4}", report.max_ratio, run.lambda.lambda),
        ));
        out.constants.lambda_s.push((*s, run.lambda.lambda));
        out.constants.c0 = Some(run.c0);
        out.files.push((format!("ledger_s{s}.csv"), run.ledger.to_csv()));
    }
    Ok(out)
}

fn propagation(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?;
    let c = cfg.cone.as_ref().expect("validated");
    let d = cfg.dim();
    let identity: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let spec = wave_to_system(
        t.spatial().ctx().clone(),
        CoefficientField::from_rows(&identity),
        FirstOrderTerms::none(),
        WaveSampling::new(t.spatial().extent()),
    )?;
    let data = bump_wave_data(&t, c.centre, c.width)?;
    let mut solver = FriedrichsOptions::new(c.truncation, cfg.time.dt, cfg.time.t_end);
    solver.outputs = cfg.time.outputs;
    let opts = ConeOptions { kind: c.kind, radius: c.radius, tol: c.tol, solver };
    let (report, run) = propagation_experiment(&spec, &t, &data, &opts)?;
    let mut constants = constants_of(&t);
    constants.c0 = Some(report.c0);
    constants.lambda_s.push((0, run.lambda.lambda));
    let check = Check::new(
        "support-inside-cone",
        report.passed,
        format!("C₀ = {}, allowance {:.4}, {} violations", report.c0, report.h_margin, report.violations.len()),
    );
    Ok(Outcome { files: vec![("cone.csv".into(), report.to_csv())], checks: vec![check], constants })
}

fn free_wave_energy(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?;
    let grid = t.spatial().clone();
    let u0 = GridFunction::from_fn(grid.clone(), |x| (1.0 + 0.4 * x[0]) * gaussian(x))?;
    let u1 = GridFunction::from_fn(grid, |x| 0.5 * gaussian(x))?;
    let state = dunkl::semilinear_wave::WaveState { u: t.forward(&u0)?, ut: t.forward(&u1)? };
    let traj = solve_linear_wave(state, None, cfg.time.t_end, cfg.time.dt)?;
    let mut csv = String::from("sigma,t,lambda_norm,bound\n");
    let mut checks = Vec::new();
    for sigma in [0.0, 1.0, 2.0] {
        let ledger = energy_check(&traj, sigma);
        for ((tt, n), b) in ledger.times.iter().zip(&ledger.norms).zip(&ledger.bounds) {
            csv.push_str(&format!("{sigma},{tt:.6},{n:.12e},{b:.12e}\n"));
        }
        checks.push(Check::new(
            format!("energy-conserved-sigma{sigma}"),
            ledger.relative_drift < DRIFT_TOLERANCE,
            format!("relative drift {:.3e}", ledger.relative_drift),
        ));
    }
    Ok(Outcome { files: vec![("energy.csv".into(), csv)], checks, constants: constants_of(&t) })
}

fn semilinear_problem<'a>(
    cfg: &ExperimentConfig,
    t: &'a DunklTransform,
) -> Result<(SemilinearProblem<'a>, GridFunction, GridFunction), ExperimentError> {
    let b = cfg.semilinear.as_ref().expect("validated");
    let q = QuadraticFormQ::new(b.q.clone())?;
    let problem = SemilinearProblem::new(t, q, b.s)?;
    let zero = GridFunction::zeros(t.spatial().clone());
    let amplitude = b.amplitude;
    let u1 = GridFunction::from_fn(t.spatial().clone(), |x| amplitude * gaussian(x))?;
    Ok((problem, zero, u1))
}

fn picard(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?;
    let (p, u0, u1) = semilinear_problem(cfg, &t)?;
    let b = cfg.semilinear.as_ref().expect("validated");
    let theta = p.initial_state(&u0, &u1)?.lambda_norm(p.sigma());
    let mut o = PicardOptions::new(cfg.time.t_end.min(p.safe_time(theta)), cfg.time.dt);
    o.max_iter = b.max_iter;
    o.tol = b.tol;
    let run = picard_solve(&p, &u0, &u1, &o)?;
    let h = &run.history;
    let mut checks = vec![
        Check::new("converged", h.converged, format!("{} iterations on [0, {:.4}]", h.iterations, h.t_used)),
        Check::new("iterates-bounded", h.bound_holds, format!("sup ‖Λu_n‖ ≤ 2‖θ‖ = {:.4}", 2.0 * h.theta_norm)),
    ];
    if let Some(r) = h.contraction_ratio {
        checks.push(Check::new(
            "contraction-ratio",
            r <= h.predicted_ratio,
            format!("measured {r:.4} against predicted {:.4}", h.predicted_ratio),
        ));
    }
    let mut constants = constants_of(&t);
    constants.algebra_constant = Some(p.calibration().constant);
    Ok(Outcome { files: vec![("picard.csv".into(), h.to_csv())], checks, constants })
}

fn lifespan(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, ExperimentError> {
    let t = transform_for(cfg)?;
    let (p, u0, u1) = semilinear_problem(cfg, &t)?;
    let b = cfg.semilinear.as_ref().expect("validated");
    let mut lo = LifespanOptions::new(b.scales.clone(), cfg.time.t_end, cfg.time.dt);
    lo.threshold = b.threshold;
    lo.low_threshold = b.low_threshold;
    lo.max_iter = b.max_iter;
    lo.tol = b.tol;
    let data = p.initial_state(&u0, &u1)?;
    let reports = par_map(&b.scales, opts.threads, |&s| lifespan_run(&p, &data, s, &lo))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = Vec::new();
    for r in &reports {
        let tag = r.scale;
        checks.push(Check::new(
            format!("lifespan-above-bound-{tag}"),
            r.respects_bound(),
            format!("observed {:.4} ({:?}) against bound {:.4}", r.observed_t, r.outcome, r.bound_t),
        ));
        if let Some(ok) = r.lower_envelope_ok {
            checks.push(Check::new(format!("blowup-envelope-{tag}"), ok, format!("T* ≈ {:.4}", r.t_star.unwrap_or(f64::NAN))));
        }
        if let Some(ok) = r.integral_unsaturated {
            checks.push(Check::new(
                format!("linf-integral-grows-{tag}"),
                ok,
                format!("dyadic increments {:?}", r.dyadic_increments.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()),
            ));
        }
        if let Some(sens) = r.threshold_sensitivity() {
            checks.push(Check::new(
                format!("threshold-insensitive-{tag}"),
                sens < SENSITIVITY_TOLERANCE,
                format!("relative change {sens:.4}"),
            ));
        }
    }
    let mut sorted: Vec<_> = reports.iter().filter(|r| !r.censored()).collect();
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let monotone = sorted.windows(2).all(|w| w[1].observed_t <= w[0].observed_t);
    checks.push(Check::new("lifespan-decreases-with-scale", monotone, format!("{} uncensored runs", sorted.len())));

    let mut constants = constants_of(&t);
    constants.algebra_constant = Some(p.calibration().constant);
    Ok(Outcome { files: vec![("lifespan.csv".into(), lifespan_csv(&reports))], checks, constants })
}
