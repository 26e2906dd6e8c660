//! `grover-demo` and `fit`.

use std::path::Path;

use rand::Rng;
use serde::Serialize;

use qmci::data::{fit_model, load_csv, FittedModelRecord, ModelFamily};
use qmci::estimate::{grover_iterations, search_state, success_probability};

use crate::config::GroverConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroverReport {
    pub n_qubits: usize,
    pub marked: usize,
    pub iterations: u32,
    pub exact_success: f64,
    pub empirical_success: f64,
    pub shots: u64,
    /// Expected oracle queries for an unstructured classical scan.
    pub classical_expected_queries: f64,
}

/// Simulates the search once, then draws `shots` measurements of it.
pub fn grover_demo<R: Rng + ?Sized>(cfg: &GroverConfig, rng: &mut R) -> CliResult<GroverReport> {
    if cfg.shots == 0 {
        return Err(CliError::Config("shots must be at least 1".into()));
    }
    let state = search_state(cfg.marked, cfg.n_qubits)?;
    let hist = state.measure_all(cfg.shots, rng)?;
    let hits = hist.counts.get(&cfg.marked).copied().unwrap_or(0);
    Ok(GroverReport {
        n_qubits: cfg.n_qubits,
        marked: cfg.marked,
        iterations: grover_iterations(cfg.n_qubits),
        exact_success: success_probability(cfg.n_qubits),
        empirical_success: hits as f64 / cfg.shots as f64,
        shots: cfg.shots,
        classical_expected_queries: (1u64 << cfg.n_qubits) as f64 / 2.0,
    })
}

pub fn fit_record(data: &Path, family: ModelFamily) -> CliResult<FittedModelRecord> {
    Ok(fit_model(&load_csv(data)?, family)?.record())
}
