#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quadrature;
pub mod root_systems;
pub mod polynomial;
pub mod calculus;
pub mod grid;
pub mod spectral;
pub mod symmetric_systems;
pub mod semilinear_wave;
