//! Configurable experiments on the Dunkl solvers: presets, TOML configs, deterministic CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, Scenario};
pub use error::{ExperimentError, Issue};
pub use presets::{describe, preset, Preset, PRESETS};
pub use runner::{run, threads_from_env, Check, RunManifest, RunOptions, THREADS_ENV};
