//! Construction, characterization, simulation, and inverse design of
//! single-qubit generalized measurements built from linear-optical and
//! controlled-gate primitives.

pub mod artifact;
pub mod chain;
pub mod error;
pub mod gtom;
pub mod inverse;
pub mod mat2;
pub mod optics;
pub mod qubit;
pub mod sampler;
pub mod sastom;
pub mod solidstate;

pub use error::{Error, Result};
pub use mat2::{Complex2x2, DEFAULT_TOL};
