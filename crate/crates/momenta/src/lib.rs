//! Moment problems for quantum measurement statistics.

pub mod error;
pub mod interference;
pub mod measure;
pub mod moments;
pub mod operators;
mod quadrature;
pub mod wavefunction;

pub use error::{Error, Result};
