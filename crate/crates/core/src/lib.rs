//! Kernel-smoothed estimation of spectral risk measures.

pub mod data;
pub mod distributions;
pub mod error;
pub mod kernel;
pub mod montecarlo;
pub mod quadrature;
pub mod riskmeasure;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
