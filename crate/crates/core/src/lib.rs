//! Pseudo-spectral simulation and coefficient-regime analysis for the
//! incompressible inertial Q-tensor model of nematic liquid crystals
//! (Qian-Sheng form).
//!
//! The library is organized as:
//!
//! - [`tensor`]: pointwise d x d matrix algebra for Q-tensors,
//! - [`coefficients`]: material constants, admissibility gates, coercivity
//!   margins, and the well-posedness regime classifier,
//! - [`spectral`]: periodic grids, FFT differentiation, the Leray projector,
//!   sharp spectral mollification, dealiasing, and Sobolev norms,
//! - [`dynamics`]: the mollified evolution equations and the IMEX
//!   per-mode time stepper,
//! - [`diagnostics`]: the energy / dissipation / entropy functionals and
//!   exponential decay fitting,
//! - [`oracle`]: deliberately naive reference implementations
//!   (dense convolution sums, closed-form mode solutions, Monte-Carlo
//!   minimization, finite differences) used for verification.

pub mod coefficients;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
