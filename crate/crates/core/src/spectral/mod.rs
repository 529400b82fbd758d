//! Periodic spectral discretization: grids, fields, FFT differentiation,
//! the Leray projector, sharp mollification, dealiasing, and Sobolev norms.

mod field;
mod grid;
mod norms;

pub use field::{MatrixField, ScalarField, VectorField};
pub use grid::{Grid, TAU};
pub use norms::{l2_inner, multi_indices, quadrature, SobolevNorms};
