use rand::Rng;

use super::gate::{Control, Gate, GateKind};
use super::noise::NoiseSpec;
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Ordered list of gates on a fixed-size register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.check_against(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends `other`, which must act on the same number of qubits.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Shape(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    /// Appends `other` with its qubit `j` relabelled as `mapping[j]` of this circuit.
    pub fn append_mapped(&mut self, other: &Circuit, mapping: &[usize]) -> Result<&mut Self> {
        if mapping.len() != other.n_qubits {
            return Err(Error::Shape(format!(
                "qubit mapping has {} entries for a {}-qubit circuit",
                mapping.len(),
                other.n_qubits
            )));
        }
        for gate in &other.gates {
            let g = Gate {
                kind: gate.kind.clone(),
                targets: gate.targets.iter().map(|&q| mapping[q]).collect(),
                controls: gate
                    .controls
                    .iter()
                    .map(|c| Control {
                        qubit: mapping[c.qubit],
                        on_one: c.on_one,
                    })
                    .collect(),
            };
            self.push(g)?;
        }
        Ok(self)
    }

    /// The adjoint circuit: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Every gate conditioned on the additional `controls`.
    pub fn controlled(&self, controls: &[Control]) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let g = g.clone().with_controls(controls)?;
                g.check_against(self.n_qubits)?;
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
        })
    }

    /// Number of gates matching `pred`.
    pub fn count_gates(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    /// Gates that act on at least one qubit; these are the noise injection points.
    pub fn physical_gate_count(&self) -> usize {
        self.count_gates(|g| !matches!(g.kind, GateKind::GlobalPhase(_)) || !g.controls.is_empty())
    }

    /// Applies the circuit to `state`, injecting stochastic Pauli errors after
    /// each physical gate when `noise` is given.
    pub fn run<R: Rng + ?Sized>(
        &self,
        state: &mut QuantumState,
        noise: Option<&NoiseSpec>,
        rng: &mut R,
    ) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        for gate in &self.gates {
            state.apply(gate)?;
            if let Some(noise) = noise {
                let physical =
                    !matches!(gate.kind, GateKind::GlobalPhase(_)) || !gate.controls.is_empty();
                if physical {
                    if let Some(err) = noise.sample(self.n_qubits, rng) {
                        state.apply(&err)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Noiseless run from |0…0⟩.
    pub fn simulate(&self) -> Result<QuantumState> {
        let mut state = QuantumState::new(self.n_qubits)?;
        for gate in &self.gates {
            state.apply(gate)?;
        }
        Ok(state)
    }
}

/// Free-function form of [`Circuit::run`] returning the transformed state.
pub fn run_circuit<R: Rng + ?Sized>(
    mut state: QuantumState,
    circuit: &Circuit,
    noise: Option<&NoiseSpec>,
    rng: &mut R,
) -> Result<QuantumState> {
    circuit.run(&mut state, noise, rng)?;
    Ok(state)
}
