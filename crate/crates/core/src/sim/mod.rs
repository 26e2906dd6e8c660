//! Exact statevector simulation of the circuit model.

mod circuit;
mod gate;
mod noise;
mod qft;
mod state;

pub use circuit::{run_circuit, Circuit};
pub use gate::{Control, Gate, GateKind, Unitary, MAX_CUSTOM_TARGETS};
pub use noise::NoiseSpec;
pub use qft::qft_circuit;
pub use state::{bitstring, Histogram, QuantumState, MAX_QUBITS};
