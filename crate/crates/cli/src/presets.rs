//! Named experiment configurations.

use dunkl::symmetric_systems::ConeKind;

use crate::config::{
    ConeBlock, ExperimentConfig, GridBlock, RootSystemBlock, Scenario, SemilinearBlock, SystemBlock, TimeBlock,
    TransformBlock, WaveBlock, SCHEMA_VERSION,
};
use crate::error::ExperimentError;

/// A named configuration together with the property its run checks.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub property: &'static str,
    pub checks: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        (self.build)()
    }
}

fn standard_grid() -> GridBlock {
    GridBlock { half_nodes: 80, spacing: 0.1, freq_half_nodes: 48, max_frequency: 6.0 }
}

fn base(name: &str, scenario: Scenario, k: &[f64], grid: GridBlock, time: TimeBlock) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        scenario,
        seed: 0,
        output_dir: None,
        root_system: RootSystemBlock { kind: "z2".into(), multiplicities: k.to_vec() },
        grid,
        time,
        transform: None,
        system: None,
        wave: None,
        cone: None,
        semilinear: None,
    }
}

fn time(t_end: f64, dt: f64, outputs: usize) -> TimeBlock {
    TimeBlock { t_end, dt, outputs }
}

fn transform_k0() -> ExperimentConfig {
    let mut c = base("transform-k0", Scenario::TransformValidation, &[0.0], standard_grid(), time(1.0, 1.0, 1));
    c.transform = Some(TransformBlock { functions: 20 });
    c
}

fn transform_dunkl_2d() -> ExperimentConfig {
    let mut c = base("transform-dunkl-2d", Scenario::TransformValidation, &[0.5, 1.0], standard_grid(), time(1.0, 1.0, 1));
    c.transform = Some(TransformBlock { functions: 8 });
    c
}

fn system(name: &str, preset: &str, k: f64) -> ExperimentConfig {
    let mut c = base(name, Scenario::SymmetricSystem, &[k], standard_grid(), time(1.0, 0.02, 10));
    c.system = Some(SystemBlock {
        preset: Some(preset.into()),
        coefficients: None,
        truncation: 5.0,
        orders: vec![0, 1, 2],
        cfl: 0.5,
    });
    c
}

fn transport_k0() -> ExperimentConfig {
    system("transport-k0", "transport", 0.0)
}

fn transport_dunkl() -> ExperimentConfig {
    system("transport-dunkl", "transport", 1.0)
}

fn coupled_energy() -> ExperimentConfig {
    system("coupled-energy", "coupled", 0.5)
}

fn variable_speed() -> ExperimentConfig {
    system("variable-speed", "variable-speed", 0.5)
}

fn wave_variable() -> ExperimentConfig {
    system("wave-variable", "variable-wave", 0.5)
}

fn wave_constant() -> ExperimentConfig {
    let mut c = base("wave-constant", Scenario::WaveReduction, &[0.7], standard_grid(), time(1.0, 0.02, 10));
    c.wave = Some(WaveBlock { a: vec![vec![2.0]], damping: 0.1, truncation: 5.0, orders: vec![0, 1, 2] });
    c
}

fn fsp_dunkl_1d() -> ExperimentConfig {
    let grid = GridBlock { half_nodes: 64, spacing: 0.05, freq_half_nodes: 80, max_frequency: 10.0 };
    let mut c = base("fsp-dunkl-1d", Scenario::Propagation, &[0.7], grid, time(1.0, 0.01, 10));
    c.cone = Some(ConeBlock { kind: ConeKind::Outer, radius: 1.0, tol: 0.05, truncation: 10.0, centre: 0.0, width: 1.0 });
    c
}

fn fsp_inner_1d() -> ExperimentConfig {
    let grid = GridBlock { half_nodes: 64, spacing: 0.05, freq_half_nodes: 80, max_frequency: 10.0 };
    let mut c = base("fsp-inner-1d", Scenario::Propagation, &[0.7], grid, time(1.0, 0.01, 10));
    c.cone = Some(ConeBlock { kind: ConeKind::Inner, radius: 1.0, tol: 0.05, truncation: 10.0, centre: 2.0, width: 1.0 });
    c
}

fn free_wave_energy() -> ExperimentConfig {
    base("free-wave-energy", Scenario::FreeWaveEnergy, &[0.5], standard_grid(), time(2.0, 0.01, 20))
}

fn focusing_block(amplitude: f64, scales: Vec<f64>) -> SemilinearBlock {
    SemilinearBlock {
        q: vec![vec![1.0, 0.0], vec![0.0, 0.0]],
        s: 3.0,
        amplitude,
        scales,
        threshold: 1e3,
        low_threshold: 1e2,
        max_iter: 60,
        tol: 1e-10,
    }
}

fn picard_contraction() -> ExperimentConfig {
    // t_end is clipped to the margin-two time by the runner.
    let mut c = base("picard-contraction", Scenario::Picard, &[0.7], standard_grid(), time(1.0, 0.01, 10));
    c.semilinear = Some(focusing_block(0.5, Vec::new()));
    c
}

fn gauss_focusing() -> ExperimentConfig {
    let mut c = base("gauss-focusing", Scenario::Lifespan, &[0.7], standard_grid(), time(4.0, 0.01, 10));
    c.semilinear = Some(focusing_block(2.0, vec![1.0, 2.0, 4.0, 8.0]));
    c
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "transform-k0",
        property: "with k = 0 the Dunkl transform is the Fourier transform, so ‖ℱf‖² = 2π‖f‖² and inversion is exact",
        checks: "inversion and Plancherel errors on random bumps, calibrated constant against 2π",
        build: transform_k0,
    },
    Preset {
        name: "transform-dunkl-2d",
        property: "on the plane with unequal multiplicities the transform is invertible and scales the weighted L² norm by one fixed constant",
        checks: "inversion and Plancherel errors on random bumps, calibrated constant against its closed form",
        build: transform_dunkl_2d,
    },
    Preset {
        name: "transport-k0",
        property: "classical transport: the truncated solution obeys the Sobolev energy inequality with the computed growth rate",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: transport_k0,
    },
    Preset {
        name: "transport-dunkl",
        property: "Dunkl transport with k = 1 obeys the same energy inequality even though T is not a derivation",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: transport_dunkl,
    },
    Preset {
        name: "coupled-energy",
        property: "two coupled components with a skew zeroth-order term: the L² norm is conserved and higher norms stay under their bounds",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: coupled_energy,
    },
    Preset {
        name: "variable-speed",
        property: "W-invariant variable coefficients: the commutator term enters the growth rate and the ledger stays below the bound",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: variable_speed,
    },
    Preset {
        name: "wave-variable",
        property: "a damped wave with variable speed, reduced to a first-order symmetric system, dissipates its energy",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: wave_variable,
    },
    Preset {
        name: "wave-constant",
        property: "a constant-coefficient wave with damping, reduced to a first-order symmetric system, stays under its energy bound",
        checks: "energy ledgers at orders 0, 1 and 2",
        build: wave_constant,
    },
    Preset {
        name: "fsp-dunkl-1d",
        property: "finite speed of propagation: data supported in |x| ≤ 1 stay inside the cone |x| ≤ 1 + C₀t up to the grid allowance",
        checks: "outer support radius against the cone at every output time",
        build: fsp_dunkl_1d,
    },
    Preset {
        name: "fsp-inner-1d",
        property: "finite speed of propagation inward: data vanishing in |x| < 1 leave the solution zero in |x| < 1 − C₀t",
        checks: "inner support radius against the cone at every output time",
        build: fsp_inner_1d,
    },
    Preset {
        name: "free-wave-energy",
        property: "the free Dunkl wave conserves ‖Λu‖ at every Sobolev index",
        checks: "relative drift of the energy at indices 0, 1 and 2",
        build: free_wave_energy,
    },
    Preset {
        name: "picard-contraction",
        property: "Picard iteration for u_tt − Δ_k u = (u_t)² contracts on the margin-two interval with ratio below the predicted 4CT‖θ‖",
        checks: "convergence, iterate bound 2‖θ‖ and measured ratio against the prediction",
        build: picard_contraction,
    },
    Preset {
        name: "gauss-focusing",
        property: "focusing blow-up for u_tt − Δ_k u = (u_t)²: lifespans shrink with the amplitude and never undercut the local existence time",
        checks: "observed lifespan against the bound, blow-up envelope, growth of ∫‖Λu‖_∞",
        build: gauss_focusing,
    },
];

pub fn preset(name: &str) -> Result<&'static Preset, ExperimentError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| ExperimentError::UnknownPreset(name.into()))
}

/// Human-readable description for `describe`.
pub fn describe(name: &str) -> Result<String, ExperimentError> {
    let p = preset(name)?;
    let c = p.config();
    Ok(format!(
        "{}\n  scenario: {}\n  property: {}\n  checks: {}\n  multiplicities: {:?}\n\n{}",
        p.name,
        c.scenario.tag(),
        p.property,
        p.checks,
        c.root_system.multiplicities,
        c.to_toml()?
    ))
}
