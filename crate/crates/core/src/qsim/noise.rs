use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Pauli, StateVector};
use crate::{Error, Result};

/// Parametric machine-quality model.
///
/// After every gate each qubit the gate touches (controls included) suffers,
/// with probability `depolarizing_prob`, a uniformly chosen Pauli X, Y or Z.
/// Every measured bit is flipped with probability `readout_flip_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depolarizing_prob: f64,
    pub readout_flip_prob: f64,
}

impl NoiseModel {
    pub fn new(depolarizing_prob: f64, readout_flip_prob: f64) -> Result<Self> {
        let model = NoiseModel {
            depolarizing_prob,
            readout_flip_prob,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(p, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("depolarizing", self.depolarizing_prob),
            ("readout flip", self.readout_flip_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!(
                    "{name} probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.depolarizing_prob > 0.0
    }

    pub(crate) fn depolarize<R: Rng + ?Sized>(
        &self,
        state: &mut StateVector,
        qubits: &[usize],
        rng: &mut R,
    ) {
        for &q in qubits {
            if rng.random::<f64>() < self.depolarizing_prob {
                let pauli = match rng.random_range(0..3) {
                    0 => Pauli::X,
                    1 => Pauli::Y,
                    _ => Pauli::Z,
                };
                state.apply_pauli(q, pauli);
            }
        }
    }
}
