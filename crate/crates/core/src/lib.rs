//! Quantum Monte Carlo integration on a classical statevector simulator.
//!
//! The pipeline mirrors the quantum algorithm end to end: a parametric
//! distribution is discretized onto 2ⁿ grid points and loaded by a
//! state-preparation circuit, the integrand is encoded on an extra qubit,
//! and amplitude estimation recovers the expectation. Classical Monte Carlo
//! and exact brute-force sums serve as baselines.

pub mod data;
pub mod encode;
pub mod error;
pub mod estimate;
pub mod fourier;
pub mod oracle;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
