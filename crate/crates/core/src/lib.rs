//! Numerics for the entanglement entropy of the free Fermi gas: entropy
//! functions and the U-functional, thermodynamic densities, the Widom boundary
//! coefficient by several routes, truncated Wiener-Hopf trace functionals at
//! finite size, and finite-dimensional operator-inequality checks.

pub mod entropy;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod thermo;

pub use error::{Error, Result};
