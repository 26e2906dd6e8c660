//! Unstructured search on a uniform superposition.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate, GateKind, QuantumState};

pub const MIN_SEARCH_QUBITS: usize = 2;
pub const MAX_SEARCH_QUBITS: usize = 12;

fn check(marked: usize, n_qubits: usize) -> Result<()> {
    if !(MIN_SEARCH_QUBITS..=MAX_SEARCH_QUBITS).contains(&n_qubits) {
        return Err(Error::Capacity(format!(
            "search register of {n_qubits} qubits, supported range is {MIN_SEARCH_QUBITS}..={MAX_SEARCH_QUBITS}"
        )));
    }
    if marked >> n_qubits != 0 {
        return Err(Error::Domain(format!(
            "marked index {marked} does not fit in {n_qubits} qubits"
        )));
    }
    Ok(())
}

/// θ = arcsin(2^{−n/2}).
pub fn search_angle(n_qubits: usize) -> f64 {
    (0.5f64).powf(n_qubits as f64 / 2.0).asin()
}

/// round(π/(4θ) − 1/2).
pub fn grover_iterations(n_qubits: usize) -> u32 {
    (PI / (4.0 * search_angle(n_qubits)) - 0.5).round() as u32
}

/// sin²((2m+1)θ) for the iterate count used by [`grover_search`].
pub fn success_probability(n_qubits: usize) -> f64 {
    let m = f64::from(grover_iterations(n_qubits));
    ((2.0 * m + 1.0) * search_angle(n_qubits)).sin().powi(2)
}

/// H on every qubit, then the optimal number of (oracle, diffusion) rounds.
pub fn search_circuit(marked: usize, n_qubits: usize) -> Result<Circuit> {
    check(marked, n_qubits)?;
    let all: Vec<usize> = (0..n_qubits).collect();
    let mut hadamards = Circuit::new(n_qubits);
    for &q in &all {
        hadamards.push(Gate::h(q))?;
    }

    // sign flip on |marked⟩: Z on qubit 0 controlled on the remaining bits
    let controls = (1..n_qubits)
        .map(|q| {
            if marked >> q & 1 == 1 {
                Control::one(q)
            } else {
                Control::zero(q)
            }
        })
        .collect();
    let mut oracle = Circuit::new(n_qubits);
    if marked & 1 == 0 {
        oracle.push(Gate::x(0))?;
    }
    oracle.push(Gate::new(GateKind::Z, vec![0], controls)?)?;
    if marked & 1 == 0 {
        oracle.push(Gate::x(0))?;
    }

    let mut c = hadamards.clone();
    for _ in 0..grover_iterations(n_qubits) {
        c.append(&oracle)?;
        c.append(&hadamards)?;
        c.push(Gate::flip_about_zero(all.clone())?)?;
        c.append(&hadamards)?;
    }
    Ok(c)
}

/// Exact final state of the search circuit.
pub fn search_state(marked: usize, n_qubits: usize) -> Result<QuantumState> {
    search_circuit(marked, n_qubits)?.simulate()
}

/// Runs the search and returns the measured index.
pub fn grover_search<R: Rng + ?Sized>(
    marked: usize,
    n_qubits: usize,
    rng: &mut R,
) -> Result<usize> {
    let hist = search_state(marked, n_qubits)?.measure_all(1, rng)?;
    Ok(*hist.counts.keys().next().expect("one shot was taken"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn two_qubits_always_succeed() {
        assert_eq!(grover_iterations(2), 1);
        for marked in 0..4 {
            let s = search_state(marked, 2).unwrap();
            assert!((s.probability_of(marked).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn four_qubits_closed_form() {
        assert_eq!(grover_iterations(4), 3);
        let expect = (7.0 * 0.25f64.asin()).sin().powi(2);
        assert!((expect - 0.961).abs() < 1e-3);
        for marked in [0, 5, 15] {
            let s = search_state(marked, 4).unwrap();
            assert!((s.probability_of(marked).unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_closed_form_for_larger_registers() {
        for n in 5..=9 {
            let marked = (1 << n) - 3;
            let p = search_state(marked, n)
                .unwrap()
                .probability_of(marked)
                .unwrap();
            assert!((p - success_probability(n)).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn sampled_search() {
        let mut rng = seeded(4);
        let hits = (0..200)
            .filter(|_| grover_search(9, 4, &mut rng).unwrap() == 9)
            .count();
        assert!(hits >= 180, "{hits}");
    }

    #[test]
    fn rejects_bad_registers() {
        assert!(matches!(search_circuit(0, 1), Err(Error::Capacity(_))));
        assert!(matches!(search_circuit(0, 13), Err(Error::Capacity(_))));
        assert!(matches!(search_circuit(16, 4), Err(Error::Domain(_))));
    }
}
