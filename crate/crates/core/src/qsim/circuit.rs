use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gate::GateOp;
use super::noise::NoiseModel;
use super::sampling::{empty_counts, sample_counts, ShotCounts};
use super::state::{validate_qubit_list, StateVector};
use crate::{rng, Error, Result};

/// Number of independent noise realizations used by [`SamplingMode::Exact`]
/// when gate noise is on; shots are split evenly across them.
pub const NOISY_TRAJECTORIES: u64 = 64;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<GateOp>,
    /// Measured qubits; outcome bit `b` is qubit `measured[b]`.
    pub measured: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            ..Default::default()
        }
    }

    pub fn push(&mut self, op: GateOp) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) -> &mut Self {
        self.ops.extend(ops);
        self
    }

    pub fn measure(&mut self, qubits: impl IntoIterator<Item = usize>) -> &mut Self {
        self.measured.extend(qubits);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::validation("circuit has no qubits"));
        }
        for op in &self.ops {
            op.validate(self.num_qubits)?;
        }
        validate_qubit_list(&self.measured, self.num_qubits)
    }

    pub fn gate_count(&self) -> usize {
        self.ops.len()
    }

    /// Gate tally keyed by gate name.
    pub fn gate_histogram(&self) -> BTreeMap<&'static str, usize> {
        let mut hist = BTreeMap::new();
        for op in &self.ops {
            *hist.entry(op.name()).or_default() += 1;
        }
        hist
    }
}

/// How shots are produced from a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Simulate once, take the exact marginal over the measured qubits and
    /// draw all shots from it. With gate noise, the shots are spread over
    /// [`NOISY_TRAJECTORIES`] independent noise realizations.
    #[default]
    Exact,
    /// Re-run the circuit and collapse the measured qubits for every shot.
    Trajectory,
}

/// Runs `circ` from `|0...0>`. With gate noise, one seeded noise realization
/// is applied.
pub fn run_circuit(circ: &Circuit, noise: Option<&NoiseModel>, seed: u64) -> Result<StateVector> {
    circ.validate()?;
    let mut rng = rng::stream(seed, 0);
    run_trajectory(circ, noise, &mut rng)
}

fn run_trajectory<R: Rng + ?Sized>(
    circ: &Circuit,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<StateVector> {
    let mut state = StateVector::zero(circ.num_qubits)?;
    let noise = noise.filter(|n| n.has_gate_noise());
    for op in &circ.ops {
        state.apply(op)?;
        if let Some(noise) = noise {
            noise.depolarize(&mut state, &op.qubits(), rng);
        }
    }
    Ok(state)
}

/// Runs `circ` for `shots` shots and tallies the measured outcomes.
pub fn sample_circuit(
    circ: &Circuit,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseModel>,
    mode: SamplingMode,
) -> Result<ShotCounts> {
    circ.validate()?;
    if shots == 0 {
        return Err(Error::validation("number of shots must be at least 1"));
    }
    if circ.measured.is_empty() {
        return Err(Error::validation("circuit measures no qubits"));
    }
    if let Some(n) = noise {
        n.validate()?;
    }
    let readout = noise.map(|n| n.readout_flip_prob).filter(|&p| p > 0.0);
    let gate_noise = noise.is_some_and(|n| n.has_gate_noise());

    match mode {
        SamplingMode::Exact if !gate_noise => {
            let state = run_trajectory(circ, None, &mut rng::stream(seed, 0))?;
            sample_counts(&state.marginal(&circ.measured)?, shots, seed, readout)
        }
        SamplingMode::Exact => {
            let trajectories = shots.min(NOISY_TRAJECTORIES);
            let mut total = empty_counts(circ.measured.len());
            for t in 0..trajectories {
                let share = shots / trajectories + u64::from(t < shots % trajectories);
                let mut rng = rng::stream(seed, t);
                let state = run_trajectory(circ, noise, &mut rng)?;
                let dist = state
                    .marginal(&circ.measured)?
                    .with_readout_flips(readout.unwrap_or(0.0));
                total.add(&dist.sample_multinomial(share, &mut rng));
            }
            Ok(total)
        }
        SamplingMode::Trajectory => {
            let flip = readout.unwrap_or(0.0);
            let mut total = empty_counts(circ.measured.len());
            for k in 0..shots {
                let mut rng = rng::stream(seed, k);
                let mut state = run_trajectory(circ, noise, &mut rng)?;
                let mut outcome = state.measure(&circ.measured, &mut rng)?;
                if flip > 0.0 {
                    for b in 0..circ.measured.len() {
                        if rng.random::<f64>() < flip {
                            outcome ^= 1 << b;
                        }
                    }
                }
                total.record(outcome);
            }
            Ok(total)
        }
    }
}
