//! Spectral zeta functions of positive elliptic operators, continued through
//! modified heat kernels.

pub mod cli;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod quadrature;
pub mod zeta;
pub mod specfun;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
