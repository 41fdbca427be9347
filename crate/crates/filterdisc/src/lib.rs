//! Unambiguous discrimination of pure states and mixtures by successive
//! filtering, with one-photon interferometer synthesis and simulation.

pub mod dtr;
pub mod error;
pub mod filtering;
pub mod gram;
pub mod linalg;
pub mod optics;
pub mod optimizer;
pub mod povm;
pub mod strategies;
pub mod textfmt;

pub use error::{Error, Result};
