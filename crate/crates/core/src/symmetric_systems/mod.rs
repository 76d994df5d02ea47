//! Dunkl-linear symmetric hyperbolic systems `∂_t u = Σ_p A_p T_p u + A_0 u + f`.

mod coefficients;
mod energy;
mod presets;
mod propagation;
mod solver;
mod wave;

#[cfg(test)]
mod tests;

pub use coefficients::{
    check_symmetry, multi_indices_of_order, multi_indices_up_to, sample_points, spectral_norm, CoefficientBounds,
    CoefficientField, MatrixFn, SourceFn, SymmetricSystemSpec, SymmetryDiagnostics, INVARIANCE_TOLERANCE,
    SYMMETRY_TOLERANCE,
};
pub use energy::{
    c_comb, estimate_lambda_s, gronwall_bound, spectral_weights, system_norm, system_norm_spectral,
    verify_energy_estimate, EnergyLedger, EnergyReport, GronwallCurve, LambdaEstimate, ENERGY_TOLERANCE,
};
pub use presets::{build_system, bump_wave_data, default_initial_data, system_preset, SystemPreset, SYSTEM_PRESETS};
pub use propagation::{
    estimate_c0, propagation_experiment, resolution_radius, support_radii, ConeKind, ConeOptions, ConeReport, ConeRow,
};
pub use solver::{friedrichs_solve, truncate, FriedrichsOptions, FriedrichsRun, DEFAULT_CFL};
pub use wave::{
    ellipticity_constant, matrix_sqrt, wave_to_system, FirstOrderTerms, ScalarFn, VectorFn, WaveSampling,
};
