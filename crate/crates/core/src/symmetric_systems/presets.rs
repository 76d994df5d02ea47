//! Named symmetric systems with default initial data.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::coefficients::{CoefficientField, MatrixFn, SymmetricSystemSpec};
use super::wave::{wave_to_system, FirstOrderTerms, WaveSampling};
use crate::error::{DunklError, Result};
use crate::grid::GridFunction;
use crate::root_systems::WeightContext;
use crate::spectral::{spectral_derivative, DunklTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemPreset {
    pub name: &'static str,
    pub dim: usize,
    pub components: usize,
    pub summary: &'static str,
}

pub const SYSTEM_PRESETS: &[SystemPreset] = &[
    SystemPreset { name: "transport", dim: 1, components: 1, summary: "u_t = T u, exact translation when k = 0" },
    SystemPreset {
        name: "coupled",
        dim: 1,
        components: 2,
        summary: "two components, indefinite A_1 and a skew zeroth-order coupling; the L² norm is conserved",
    },
    SystemPreset { name: "damped", dim: 1, components: 2, summary: "symmetric hyperbolic pair with damping A_0 = −I/2" },
    SystemPreset {
        name: "variable-speed",
        dim: 1,
        components: 1,
        summary: "scalar transport with speed 1 + 0.3 e^{−x²} and a constant zeroth-order term",
    },
    SystemPreset { name: "free-wave", dim: 1, components: 3, summary: "first-order form of u_tt = Δ_k u" },
    SystemPreset {
        name: "variable-wave",
        dim: 1,
        components: 3,
        summary: "first-order form of u_tt = T(a T u) − 0.2 u_t with a = 1 + 0.5 e^{−x²/4}",
    },
    SystemPreset { name: "transport-2d", dim: 2, components: 1, summary: "u_t = T_1 u + 0.5 T_2 u on the plane" },
];

pub fn system_preset(name: &str) -> Result<&'static SystemPreset> {
    SYSTEM_PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| DunklError::InvalidArgument(format!("unknown system preset `{name}`")))
}

fn speed(x: &[f64]) -> f64 {
    1.0 + 0.3 * (-x[0] * x[0]).exp()
}

fn wave_speed(x: &[f64]) -> f64 {
    1.0 + 0.5 * (-0.25 * x[0] * x[0]).exp()
}

/// Builds the named system for the multiplicities carried by `ctx`.
pub fn build_system(name: &str, ctx: WeightContext) -> Result<SymmetricSystemSpec> {
    let preset = system_preset(name)?;
    if ctx.dim() != preset.dim {
        return Err(DunklError::InvalidArgument(format!("preset `{name}` needs dimension {}, got {}", preset.dim, ctx.dim())));
    }
    let rows = CoefficientField::from_rows;
    match name {
        "transport" => SymmetricSystemSpec::new(ctx, vec![rows(&[vec![0.0]]), rows(&[vec![1.0]])], None, 4.0),
        "coupled" => SymmetricSystemSpec::new(
            ctx,
            vec![rows(&[vec![0.0, 0.3], vec![-0.3, 0.0]]), rows(&[vec![1.0, 0.5], vec![0.5, -1.0]])],
            None,
            4.0,
        ),
        "damped" => SymmetricSystemSpec::new(
            ctx,
            vec![rows(&[vec![-0.5, 0.0], vec![0.0, -0.5]]), rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])],
            None,
            4.0,
        ),
        "variable-speed" => {
            let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, speed(x)));
            let a1 = CoefficientField::variable(1, false, eval).with_sampled_bounds(1, 8.0, 0.0, 2, 1.2);
            SymmetricSystemSpec::new(ctx, vec![rows(&[vec![0.2]]), a1], None, 4.0)
        }
        "free-wave" => wave_to_system(
            ctx,
            CoefficientField::constant(DMatrix::identity(1, 1)),
            FirstOrderTerms::none(),
            WaveSampling::new(4.0),
        ),
        "variable-wave" => {
            let eval: MatrixFn = Arc::new(|_, x: &[f64]| DMatrix::from_element(1, 1, wave_speed(x)));
            wave_to_system(
                ctx,
                CoefficientField::variable(1, false, eval),
                FirstOrderTerms::damping(0.2),
                WaveSampling::new(8.0),
            )
        }
        "transport-2d" => {
            SymmetricSystemSpec::new(ctx, vec![rows(&[vec![0.0]]), rows(&[vec![1.0]]), rows(&[vec![0.5]])], None, 4.0)
        }
        _ => unreachable!("preset table and builder disagree"),
    }
}

fn gaussian(x: &[f64]) -> f64 {
    (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

/// Standard Gaussian data for the named system. Wave systems start at rest with
/// `w = √a T u` consistent with `u`.
pub fn default_initial_data(name: &str, transform: &DunklTransform) -> Result<Vec<GridFunction>> {
    let preset = system_preset(name)?;
    let grid = transform.spatial().clone();
    let g = |f: &dyn Fn(&[f64]) -> f64| GridFunction::from_fn(grid.clone(), f);
    let tu = |u: &GridFunction| -> Result<GridFunction> {
        transform.inverse(&spectral_derivative(0, &transform.forward(u)?))
    };
    match preset.name {
        "transport" | "variable-speed" | "transport-2d" => Ok(vec![g(&gaussian)?]),
        "coupled" | "damped" => Ok(vec![g(&gaussian)?, g(&|x: &[f64]| 0.5 * gaussian(&[x[0] - 0.5]))?]),
        "free-wave" => {
            let u = g(&|x: &[f64]| (1.0 + 0.4 * x[0]) * gaussian(x))?;
            let w = tu(&u)?;
            Ok(vec![u, GridFunction::zeros(grid.clone()), w])
        }
        "variable-wave" => {
            let u = g(&gaussian)?;
            let b = g(&|x: &[f64]| wave_speed(x).sqrt())?;
            let w = b.zip_with(&tu(&u)?, |p, q| p * q);
            Ok(vec![u, GridFunction::zeros(grid.clone()), w])
        }
        _ => unreachable!("preset table and data disagree"),
    }
}

/// Free wave data `u = 0`, `∂_t u = bump((|x| − c)/w)` for the cone experiments.
pub fn bump_wave_data(transform: &DunklTransform, centre: f64, width: f64) -> Result<Vec<GridFunction>> {
    let bump = |r: f64| if r.abs() < 1.0 { (1.0 - 1.0 / (1.0 - r * r)).exp() } else { 0.0 };
    let grid = transform.spatial().clone();
    let zero = GridFunction::zeros(grid.clone());
    let d = grid.dim();
    let v = GridFunction::from_fn(grid, |x| {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        bump((n - centre) / width)
    })?;
    let mut out = vec![zero.clone(), v];
    out.extend(std::iter::repeat_n(zero, d));
    Ok(out)
}
