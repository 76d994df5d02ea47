//! Experiment configuration: TOML schema, parsing and validation.

use std::path::PathBuf;

use dunkl::symmetric_systems::{system_preset, ConeKind, DEFAULT_CFL};
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Issue};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest `|x|·|ξ|` the kernel series accepts.
const KERNEL_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TransformValidation,
    SymmetricSystem,
    WaveReduction,
    Propagation,
    FreeWaveEnergy,
    Picard,
    Lifespan,
}

impl Scenario {
    pub fn tag(self) -> &'static str {
        match self {
            Self::TransformValidation => "transform-validation",
            Self::SymmetricSystem => "symmetric-system",
            Self::WaveReduction => "wave-reduction",
            Self::Propagation => "propagation",
            Self::FreeWaveEnergy => "free-wave-energy",
            Self::Picard => "picard",
            Self::Lifespan => "lifespan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSystemBlock {
    /// Only `"z2"`, the coordinate reflections, is supported by the transform.
    pub kind: String,
    pub multiplicities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    /// Spatial nodes per half axis.
    pub half_nodes: usize,
    pub spacing: f64,
    /// Frequency nodes per half axis.
    pub freq_half_nodes: usize,
    pub max_frequency: f64,
}

impl GridBlock {
    pub fn extent(&self) -> f64 {
        self.half_nodes as f64 * self.spacing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_outputs")]
    pub outputs: usize,
}

fn default_outputs() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformBlock {
    pub functions: usize,
}

/// A symmetric system given by preset name or by constant matrices `[A_0, A_1, …, A_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<Vec<f64>>>>,
    pub truncation: f64,
    pub orders: Vec<usize>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveBlock {
    /// Constant symmetric positive definite `A`.
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub damping: f64,
    pub truncation: f64,
    pub orders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub radius: f64,
    pub tol: f64,
    pub truncation: f64,
    /// Data `∂_t u = bump((|x| − centre)/width)`.
    pub centre: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearBlock {
    pub q: Vec<Vec<f64>>,
    pub s: f64,
    /// Data `u = 0`, `∂_t u = amplitude · e^{−|x|²/2}`.
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_low_threshold")]
    pub low_threshold: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_threshold() -> f64 {
    1e3
}

fn default_low_threshold() -> f64 {
    1e2
}

fn default_max_iter() -> usize {
    60
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub root_system: RootSystemBlock,
    pub grid: GridBlock,
    pub time: TimeBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearBlock>,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fails only for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml(&self) -> Result<String, ExperimentError> {
        toml::to_string(self).map_err(|e| ExperimentError::Serialize(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.root_system.multiplicities.len()
    }

    /// All problems found, or `Ok` if there are none.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Invalid(issues))
        }
    }

    pub fn issues(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: String| out.push(Issue { field: field.into(), message });
        if self.schema_version != SCHEMA_VERSION {
            bad("schema_version", format!("expected {SCHEMA_VERSION}, found {}", self.schema_version));
        }
        if i64::try_from(self.seed).is_err() {
            bad("seed", format!("must be at most {}, found {}", i64::MAX, self.seed));
        }
        if self.name.trim().is_empty() {
            bad("name", "must not be empty".into());
        }
        let rs = &self.root_system;
        if rs.kind != "z2" {
            bad("root_system.kind", format!("only \"z2\" is supported, found {:?}", rs.kind));
        }
        let d = rs.multiplicities.len();
        if !(1..=3).contains(&d) {
            bad("root_system.multiplicities", format!("need 1 to 3 entries, found {d}"));
        }
        if rs.multiplicities.iter().any(|k| !(0.0..=10.0).contains(k)) {
            bad("root_system.multiplicities", "each k must lie in [0, 10]".into());
        }
        let g = &self.grid;
        if !(8..=512).contains(&g.half_nodes) {
            bad("grid.half_nodes", format!("must lie in [8, 512], found {}", g.half_nodes));
        }
        if !(g.spacing > 0.0 && g.spacing <= 1.0) {
            bad("grid.spacing", format!("must lie in (0, 1], found {}", g.spacing));
        }
        if !(4..=256).contains(&g.freq_half_nodes) {
            bad("grid.freq_half_nodes", format!("must lie in [4, 256], found {}", g.freq_half_nodes));
        }
        if !(g.max_frequency > 0.0) {
            bad("grid.max_frequency", "must be positive".into());
        }
        if g.extent() * g.max_frequency > KERNEL_CAP {
            bad(
                "grid",
                format!("half_nodes · spacing · max_frequency = {} exceeds the kernel cap {KERNEL_CAP}", g.extent() * g.max_frequency),
            );
        }
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end <= 100.0) {
            bad("time.t_end", format!("must lie in (0, 100], found {}", t.t_end));
        }
        if !(t.dt > 0.0 && t.dt <= t.t_end) {
            bad("time.dt", format!("must lie in (0, t_end], found {}", t.dt));
        }
        if t.outputs == 0 {
            bad("time.outputs", "must be at least 1".into());
        }

        let missing = |block: &str| Issue { field: block.into(), message: format!("scenario {} needs a [{block}] block", self.scenario.tag()) };
        match self.scenario {
            Scenario::TransformValidation => match &self.transform {
                None => out.push(missing("transform")),
                Some(b) if !(1..=1000).contains(&b.functions) => {
                    out.push(Issue { field: "transform.functions".into(), message: "must lie in [1, 1000]".into() })
                }
                _ => {}
            },
            Scenario::SymmetricSystem => match &self.system {
                None => out.push(missing("system")),
                Some(b) => system_issues(b, d, &mut out),
            },
            Scenario::WaveReduction => match &self.wave {
                None => out.push(missing("wave")),
                Some(b) => wave_issues(b, d, &mut out),
            },
            Scenario::Propagation => match &self.cone {
                None => out.push(missing("cone")),
                Some(b) => cone_issues(b, &mut out),
            },
            Scenario::FreeWaveEnergy => {}
            Scenario::Picard | Scenario::Lifespan => match &self.semilinear {
                None => out.push(missing("semilinear")),
                Some(b) => semilinear_issues(b, &rs.multiplicities, self.scenario, &mut out),
            },
        }
        out
    }
}

fn truncation_issue(n: f64, field: &str, out: &mut Vec<Issue>) {
    if !(n > 0.0) {
        out.push(Issue { field: field.into(), message: "must be positive".into() });
    }
}

fn orders_issue(orders: &[usize], field: &str, out: &mut Vec<Issue>) {
    if orders.is_empty() || orders.iter().any(|&s| s > 4) {
        out.push(Issue { field: field.into(), message: "need at least one order, each at most 4".into() });
    }
}

fn square(m: &[Vec<f64>], n: usize) -> bool {
    m.len() == n && m.iter().all(|r| r.len() == n && r.iter().all(|v| v.is_finite()))
}

fn symmetric(m: &[Vec<f64>]) -> bool {
    (0..m.len()).all(|i| (0..m.len()).all(|j| (m[i][j] - m[j][i]).abs() <= 1e-12))
}

fn system_issues(b: &SystemBlock, d: usize, out: &mut Vec<Issue>) {
    truncation_issue(b.truncation, "system.truncation", out);
    if !(b.cfl > 0.0 && b.cfl <= 1.0) {
        out.push(Issue { field: "system.cfl".into(), message: "must lie in (0, 1]".into() });
    }
    orders_issue(&b.orders, "system.orders", out);
    match (&b.preset, &b.coefficients) {
        (Some(_), Some(_)) | (None, None) => out.push(Issue {
            field: "system".into(),
            message: "give exactly one of `preset` or `coefficients`".into(),
        }),
        (Some(p), None) => match system_preset(p) {
            Err(_) => out.push(Issue { field: "system.preset".into(), message: format!("unknown preset {p:?}") }),
            Ok(sp) if sp.dim != d => out.push(Issue {
                field: "system.preset".into(),
                message: format!("preset {p:?} needs {} multiplicities, found {d}", sp.dim),
            }),
            _ => {}
        },
        (None, Some(c)) => {
            let m = c.first().map_or(0, |a| a.len());
            if c.len() != d + 1 || m == 0 || c.iter().any(|a| !square(a, m)) {
                out.push(Issue {
                    field: "system.coefficients".into(),
                    message: format!("need {} square matrices of equal size (A_0, …, A_d)", d + 1),
                });
            } else if c[1..].iter().any(|a| !symmetric(a)) {
                out.push(Issue { field: "system.coefficients".into(), message: "A_1 … A_d must be symmetric".into() });
            }
        }
    }
}

fn wave_issues(b: &WaveBlock, d: usize, out: &mut Vec<Issue>) {
    truncation_issue(b.truncation, "wave.truncation", out);
    orders_issue(&b.orders, "wave.orders", out);
    if !square(&b.a, d) || !symmetric(&b.a) {
        out.push(Issue { field: "wave.a".into(), message: format!("need a symmetric {d}×{d} matrix") });
    }
    if !b.damping.is_finite() || b.damping < 0.0 {
        out.push(Issue { field: "wave.damping".into(), message: "must be finite and non-negative".into() });
    }
}

fn cone_issues(b: &ConeBlock, out: &mut Vec<Issue>) {
    truncation_issue(b.truncation, "cone.truncation", out);
    if !(b.radius > 0.0) {
        out.push(Issue { field: "cone.radius".into(), message: "must be positive".into() });
    }
    if !(b.tol > 0.0 && b.tol < 1.0) {
        out.push(Issue { field: "cone.tol".into(), message: "must lie in (0, 1)".into() });
    }
    if !(b.width > 0.0) || !(b.centre >= 0.0) {
        out.push(Issue { field: "cone.width".into(), message: "need width > 0 and centre ≥ 0".into() });
    }
}

fn semilinear_issues(b: &SemilinearBlock, k: &[f64], scenario: Scenario, out: &mut Vec<Issue>) {
    let d = k.len();
    if !square(&b.q, d + 1) || !symmetric(&b.q) {
        out.push(Issue { field: "semilinear.q".into(), message: format!("need a symmetric {}×{} matrix", d + 1, d + 1) });
    }
    let min_s = k.iter().sum::<f64>() + d as f64 / 2.0 + 1.0;
    if !(b.s > min_s) {
        out.push(Issue { field: "semilinear.s".into(), message: format!("need s > γ + d/2 + 1 = {min_s}") });
    }
    if !b.amplitude.is_finite() || b.amplitude < 0.0 {
        out.push(Issue { field: "semilinear.amplitude".into(), message: "must be finite and non-negative".into() });
    }
    if scenario == Scenario::Lifespan {
        if b.scales.is_empty() || b.scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
            out.push(Issue { field: "semilinear.scales".into(), message: "need non-negative scales".into() });
        }
        if !(b.threshold > b.low_threshold && b.low_threshold > 1.0) {
            out.push(Issue { field: "semilinear.threshold".into(), message: "need threshold > low_threshold > 1".into() });
        }
    }
    if b.max_iter == 0 || !(b.tol > 0.0) {
        out.push(Issue { field: "semilinear.max_iter".into(), message: "need max_iter ≥ 1 and tol > 0".into() });
    }
}
