use thiserror::Error;

/// Errors produced by the Dunkl calculus and the solvers built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DunklError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reflection group closure exceeded {cap} elements; input is probably not a root system")]
    NonTermination { cap: usize },

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("polynomial division left remainder {0:e}")]
    InexactDivision(f64),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel argument |xz| = {value} exceeds series cap {cap}; rescale the domain")]
    Range { value: f64, cap: f64 },

    #[error("data does not decay at the grid boundary: |f| = {value:e} > {tol:e}")]
    Truncation { value: f64, tol: f64 },

    #[error("time step {dt} exceeds stability limit {dt_max}")]
    Cfl { dt: f64, dt_max: f64 },

    #[error("solution diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("coefficient field is not W-invariant: deviation {0:e}")]
    NotInvariant(f64),

    #[error("system is not symmetric: max asymmetry {0:e}")]
    NotSymmetric(f64),

    #[error("matrix is not uniformly elliptic: smallest eigenvalue {0:e}")]
    Ellipticity(f64),

    #[error("missing bound metadata for coefficient A_{0}")]
    MissingBounds(usize),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("Picard iteration failed to contract after {iterations} iterations (margin violated: {margin_violated})")]
    ContractionFailure { iterations: usize, margin_violated: bool },
}

pub type Result<T> = std::result::Result<T, DunklError>;
