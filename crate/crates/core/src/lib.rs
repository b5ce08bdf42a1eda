//! Hankel-operator spectral theory for the cubic Szegő equation
//! `i u_t = Pi(|u|^2 u)` on the circle.
//!
//! - [`symbol`]: truncated Fourier and rational symbols, the nonlinearity and
//!   the conserved functionals.
//! - [`hankel`]: `H_u`, `K_u`, their spectra and the action-angle coordinates.
//! - [`transform`]: the explicit inverse `u(z) = X (I - zA)^{-1} Y`.
//! - [`flow`]: exact evolution in action-angle variables and an RK4 oracle.
//! - [`inverse_hankel`]: sequences with prescribed Hankel spectra.
//! - [`experiments`]: perturbed stationary waves, `sigma` drift and trace bounds.

// Input guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod flow;
pub mod hankel;
pub mod inverse_hankel;
pub mod linalg;
pub mod sampling;
pub mod suites;
pub mod symbol;
pub mod transform;

pub use error::{Error, GenericityViolation, Result};
pub use flow::{ConservedReport, TrajectoryRecord};
pub use hankel::{EigenSystem, HankelPair, SpectralCoordinates};
pub use num_complex::Complex64;
pub use symbol::{FourierSymbol, RationalSymbol, SymbolFunctionals};
pub use transform::InverseModel;
