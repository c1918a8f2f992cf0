//! Numerical lab for maximal subspace averages.
//!
//! Grassmannian geometry, δ-plates, grid and FFT realizations of thin
//! subspace averages, Kakeya/Nikodym maximal functions, sharpness
//! constructions and directional Carleson sequences, plus a config-driven
//! experiment harness.

pub mod carleson;
pub mod cli;
pub mod error;
pub mod extremals;
pub mod fourierops;
pub mod grassmann;
pub mod gridops;
pub mod plates;
pub mod rng;

pub use error::{Error, Result};
