//! Gate-level statevector simulator.
//!
//! Gates act in place on a dense amplitude vector; qubit `k` is bit `k` of
//! the basis-state index. Measurements are either sampled from the exact
//! marginal of the final state or simulated shot by shot; both paths are
//! seeded and reproducible.

mod circuit;
mod gate;
mod noise;
mod sampling;
mod state;

pub use circuit::{run_circuit, sample_circuit, Circuit, SamplingMode, NOISY_TRAJECTORIES};
pub use gate::{Control, GateOp};
pub use noise::NoiseModel;
pub use sampling::{sample_counts, Distribution, ShotCounts, NORMALIZATION_TOL};
pub use state::{max_qubits, StateVector, DEFAULT_MAX_QUBITS, MAX_QUBITS_ENV};

use crate::Result;

/// `|0...0>` on `num_qubits` qubits.
pub fn new_zero_state(num_qubits: usize) -> Result<StateVector> {
    StateVector::zero(num_qubits)
}

/// Returns `state` transformed by `op`.
pub fn apply_gate(mut state: StateVector, op: &GateOp) -> Result<StateVector> {
    state.apply(op)?;
    Ok(state)
}

/// Probability table over `qubits` of `state`.
pub fn marginal_distribution(state: &StateVector, qubits: &[usize]) -> Result<Distribution> {
    state.marginal(qubits)
}
