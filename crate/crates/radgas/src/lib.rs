//! Pseudo-spectral laboratory for the radiating-gas model
//! `u_t + div f(u) = -u + (I - Laplacian)^{-1} u` on a periodic box,
//! with decay-rate fitting and structural monitors.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod field;
pub mod grid;
pub mod initdata;
pub mod integrator;
pub mod model;
pub mod multiplier;
pub mod norms;

pub use error::{RadgasError, Result};
