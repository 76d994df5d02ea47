use std::fmt;

use dunkl::error::DunklError;
use thiserror::Error;

/// One problem found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("cannot serialise configuration: {0}")]
    Serialize(String),

    #[error("invalid configuration:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),

    #[error("unknown preset `{0}`; try `list-presets`")]
    UnknownPreset(String),

    #[error("give exactly one of a preset name or --config")]
    Source,

    #[error(transparent)]
    Dunkl(#[from] DunklError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ExperimentError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }
}
