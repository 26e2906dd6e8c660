//! Phase-estimation amplitude estimation.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::likelihood::{AmplitudeEstimate, FitFlags};
use super::problem::{grover_operator, EstimationProblem};
use crate::error::{Error, Result};
use crate::sim::{qft_circuit, Circuit, Control, Gate, QuantumState, MAX_QUBITS};

pub const MAX_EVAL_QUBITS: usize = 10;

fn check_capacity(problem: &EstimationProblem, t: usize) -> Result<()> {
    if !(1..=MAX_EVAL_QUBITS).contains(&t) {
        return Err(Error::Capacity(format!(
            "{t} evaluation qubits requested, supported range is 1..={MAX_EVAL_QUBITS}"
        )));
    }
    let total = problem.n_qubits() + t;
    if total > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "phase estimation needs {total} qubits, the simulator holds at most {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// P-uses of one canonical run: A once plus 2^t − 1 controlled iterates.
pub fn canonical_oracle_calls(t: usize) -> u64 {
    (1u64 << (t + 1)) - 1
}

/// a = sin²(π·y/2ᵗ).
pub fn amplitude_from_outcome(y: usize, t: usize) -> f64 {
    (PI * y as f64 / (1u64 << t) as f64).sin().powi(2)
}

/// Exact distribution of the evaluation-register outcome y ∈ 0..2ᵗ.
///
/// The work register holds A|0⟩, evaluation qubit j controls Q^(2ʲ), and the
/// inverse QFT reads the eigenphase out as y ≈ 2ᵗ·θ/π or 2ᵗ − 2ᵗ·θ/π.
pub fn qae_outcome_distribution(problem: &EstimationProblem, t: usize) -> Result<Vec<f64>> {
    check_capacity(problem, t)?;
    let work = problem.n_qubits();
    let total = work + t;
    let q = grover_operator(problem)?;

    let mut state = QuantumState::new(total)?;
    for g in problem.a_circuit().gates() {
        state.apply(g)?;
    }
    for j in 0..t {
        state.apply(&Gate::h(work + j))?;
    }
    // wider circuit so the controlled copy can address the evaluation qubit
    let mut wide = Circuit::new(total);
    wide.append_mapped(&q, &(0..work).collect::<Vec<_>>())?;
    for j in 0..t {
        let cq = wide.controlled(&[Control::one(work + j)])?;
        for _ in 0..1u64 << j {
            for g in cq.gates() {
                state.apply(g)?;
            }
        }
    }
    let mut iqft = Circuit::new(total);
    iqft.append_mapped(&qft_circuit(t, true)?, &(work..total).collect::<Vec<_>>())?;
    for g in iqft.gates() {
        state.apply(g)?;
    }

    let mut dist = vec![0.0; 1 << t];
    for (i, p) in state.probabilities().into_iter().enumerate() {
        dist[i >> work] += p;
    }
    Ok(dist)
}

/// One phase-estimation run: samples y from the exact outcome distribution.
///
/// The interval is the standard bound a ± π·2⁻ᵗ·(2√a + π·2⁻ᵗ) around the
/// estimate, clipped to [0, 1].
pub fn canonical_qae<R: Rng + ?Sized>(
    problem: &EstimationProblem,
    t: usize,
    rng: &mut R,
) -> Result<AmplitudeEstimate> {
    let dist = qae_outcome_distribution(problem, t)?;
    let y = WeightedIndex::new(&dist)
        .map_err(|e| Error::Domain(format!("outcome distribution: {e}")))?
        .sample(rng);
    Ok(estimate_from_outcome(y, t))
}

pub fn estimate_from_outcome(y: usize, t: usize) -> AmplitudeEstimate {
    let a_hat = amplitude_from_outcome(y, t);
    let step = PI / (1u64 << t) as f64;
    let delta = step * (2.0 * a_hat.sqrt() + step);
    let ci_low = (a_hat - delta).max(0.0);
    let ci_high = (a_hat + delta).min(1.0);
    AmplitudeEstimate {
        a_hat,
        ci_low,
        ci_high,
        oracle_calls: canonical_oracle_calls(t),
        lambda_hat: None,
        flags: FitFlags {
            at_boundary: ci_low == 0.0 || ci_high == 1.0,
            ..FitFlags::default()
        },
    }
}
