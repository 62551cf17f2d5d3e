//! Cosine-similarity fingerprint positioning with a swap-test circuit.
//!
//! The crate is split along the pipeline:
//!
//! - [`qsim`]: a small gate-level statevector simulator with seeded shot
//!   sampling and an optional depolarizing/readout noise model.
//! - [`prep`]: amplitude encoding of RSS vectors, as uniformly-controlled
//!   `Ry` cascades.
//! - [`locator`]: the positioning circuit, the exact analytic outcome
//!   distribution, and the quantum and classical locators.
//! - [`testbed`]: synthetic log-distance RSS datasets and their on-disk format.
//! - [`harness`]: evaluation sweeps, error CDFs and complexity accounting.
//!
//! Register layout used throughout: qubit 0 is the least significant bit of a
//! basis-state index. The positioning circuit places the index register in
//! the low qubits, then the fingerprint register, then the sample register,
//! with the ancilla on the highest qubit.

pub mod error;
pub mod harness;
pub mod locator;
pub mod prep;
pub mod qsim;
pub mod rng;
pub mod testbed;

pub use error::{Error, Result};
pub use harness::{complexity_report, evaluate, ComplexityReport, EvalConfig, EvalReport, Sweep};
pub use locator::{
    analytic_distribution, build_positioning_circuit, classical_locate, counts_to_similarity,
    quantum_analytic_locate, quantum_locate, verify_swap_test_identities, AnalyticDistribution,
    FingerprintDb, Location, LocationEstimate, Method, QuantumOptions, Record, SelectionRule,
};
pub use prep::{rss_to_amplitudes, AmplitudeMap, AmplitudeVector, NormalizationConfig};
pub use qsim::{Circuit, GateOp, NoiseModel, SamplingMode, ShotCounts, StateVector};
pub use testbed::{generate_synthetic, load_dataset, save_dataset, Area, Dataset, PathLossParams};

/// Smallest `k` with `2^k >= n`; `ceil_log2(1) == 0`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n > 0, "ceil_log2 of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::ceil_log2;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(44), 6);
        assert_eq!(ceil_log2(1024), 10);
    }
}
