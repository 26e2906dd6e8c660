use std::f64::consts::PI;

use super::circuit::Circuit;
use super::gate::Gate;
use crate::error::Result;

/// Quantum Fourier transform on `n_qubits` qubits.
///
/// Maps amplitudes x_j to y_k = 2^{-n/2} Σ_j x_j e^{2πi jk / 2ⁿ} with the usual
/// little-endian index convention; the trailing swaps restore qubit order.
/// `inverse` returns the adjoint circuit.
pub fn qft_circuit(n_qubits: usize, inverse: bool) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits);
    for target in (0..n_qubits).rev() {
        c.push(Gate::h(target))?;
        for control in (0..target).rev() {
            let k = target - control;
            c.push(Gate::controlled_phase(
                control,
                target,
                PI / (1u64 << k) as f64,
            )?)?;
        }
    }
    for q in 0..n_qubits / 2 {
        c.push(Gate::swap(q, n_qubits - 1 - q)?)?;
    }
    Ok(if inverse { c.inverse() } else { c })
}
