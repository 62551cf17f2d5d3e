use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A control qubit of a multi-controlled gate. The gate fires when the qubit
/// reads `1` if `polarity` is true, or `0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: true,
        }
    }

    pub fn off(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: false,
        }
    }
}

/// Gate set of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateOp {
    H {
        target: usize,
    },
    X {
        target: usize,
    },
    /// Rotation about Y by `theta` radians: `|0> -> cos(θ/2)|0> + sin(θ/2)|1>`.
    Ry {
        target: usize,
        theta: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// `Ry(theta)` on `target` when every control matches its polarity.
    CRy {
        controls: Vec<Control>,
        target: usize,
        theta: f64,
    },
    /// Swaps `a` and `b` when `control` is `|1>`.
    CSwap {
        control: usize,
        a: usize,
        b: usize,
    },
}

impl GateOp {
    pub fn h(target: usize) -> Self {
        GateOp::H { target }
    }

    pub fn x(target: usize) -> Self {
        GateOp::X { target }
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        GateOp::Ry { target, theta }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Cnot { control, target }
    }

    /// Controlled `Ry`; with no controls this is a plain [`GateOp::Ry`].
    pub fn cry(controls: Vec<Control>, target: usize, theta: f64) -> Self {
        if controls.is_empty() {
            GateOp::Ry { target, theta }
        } else {
            GateOp::CRy {
                controls,
                target,
                theta,
            }
        }
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        GateOp::CSwap { control, a, b }
    }

    /// Every qubit the gate acts on, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateOp::H { target } | GateOp::X { target } | GateOp::Ry { target, .. } => {
                vec![*target]
            }
            GateOp::Cnot { control, target } => vec![*control, *target],
            GateOp::CRy {
                controls, target, ..
            } => controls
                .iter()
                .map(|c| c.qubit)
                .chain(std::iter::once(*target))
                .collect(),
            GateOp::CSwap { control, a, b } => vec![*control, *a, *b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateOp::H { .. } => "h",
            GateOp::X { .. } => "x",
            GateOp::Ry { .. } => "ry",
            GateOp::Cnot { .. } => "cnot",
            GateOp::CRy { .. } => "cry",
            GateOp::CSwap { .. } => "cswap",
        }
    }

    /// Checks indices are in range and pairwise distinct.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        match self {
            GateOp::Ry { theta, .. } | GateOp::CRy { theta, .. } if !theta.is_finite() => Err(
                Error::validation(format!("non-finite rotation angle {theta}")),
            ),
            _ => Ok(()),
        }
    }
}
