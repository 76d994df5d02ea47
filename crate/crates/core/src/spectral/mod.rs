//! Dunkl kernel, transform and spectral multipliers on `Z₂^d`.

mod kernel;
mod multipliers;
mod transform;

pub use kernel::{kernel_1d, kernel_table_csv, kernel_zd, KernelSeries, DEFAULT_SERIES_CAP};
pub use multipliers::{
    calibrate_algebra_constant, convolve, cutoff_sharp, cutoff_smooth, psi, random_bump, sobolev_norm,
    sobolev_norm_grid, spectral_derivative, translate, AlgebraCalibration,
};
pub use transform::{
    build_transform, CalibrationManifest, DunklTransform, FrequencyGrid, SpectralField, CALIBRATION_TOLERANCE,
    DECAY_TOLERANCE,
};
