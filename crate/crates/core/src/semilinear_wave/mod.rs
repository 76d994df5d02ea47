//! Semilinear Dunkl-wave equation `∂²_t u − Δ_k u = Q(Λ_k u, Λ_k u)`: exact linear propagator,
//! Picard iteration with dyadic cutoffs, and lifespan experiments.

mod form;
mod lifespan;
mod linear;
mod picard;

pub use form::{lambda_field, lambda_norm_spectral, LambdaField, QuadraticFormQ};
pub use lifespan::{lifespan_csv, lifespan_experiment, lifespan_run, LifespanOptions, LifespanOutcome, LifespanReport};
pub use linear::{energy_check, linear_wave_step, solve_linear_wave, WaveEnergyLedger, WaveState, WaveTrajectory};
pub use picard::{
    picard_from_state, picard_solve, PicardHistory, PicardOptions, PicardRun, SemilinearProblem, CALIBRATION_PAIRS,
    CALIBRATION_SEED,
};
