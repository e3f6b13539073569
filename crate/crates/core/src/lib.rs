//! Vacuum charge of a one-dimensional Dirac field in an electric square well
//! and in the chirally equivalent pseudoscalar background.

pub mod algebra;
pub mod error;
pub mod evolution;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod spectral;
pub mod vacuum;

pub use error::{Error, Result};
