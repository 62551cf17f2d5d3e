use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Map, Value};

use super::gate::GateOp;
use super::sampling::Distribution;
use crate::{Error, Result};

/// Default statevector capacity in qubits (2^20 amplitudes).
pub const DEFAULT_MAX_QUBITS: usize = 20;

/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QSL_MAX_QUBITS";

/// Hard ceiling on the override; beyond this the allocation cannot succeed.
const ABSOLUTE_MAX_QUBITS: usize = 34;

/// Capacity in qubits, honoring `QSL_MAX_QUBITS` when it parses.
pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&q| (1..=ABSOLUTE_MAX_QUBITS).contains(&q))
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Real([[f64; 2]; 2]),
    Pauli(Pauli),
}

/// Pure state of `num_qubits` qubits; qubit `k` is bit `k` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits, bounded by [`max_qubits`].
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_with_limit(num_qubits, max_qubits())
    }

    pub fn zero_with_limit(num_qubits: usize, max: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > max.min(ABSOLUTE_MAX_QUBITS) {
            return Err(Error::Capacity {
                requested: num_qubits,
                max,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps explicit amplitudes; the length must be a power of two and the
    /// norm 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::validation(format!("state norm {norm} is not 1")));
        }
        if len.trailing_zeros() as usize > max_qubits() {
            return Err(Error::Capacity {
                requested: len.trailing_zeros() as usize,
                max: max_qubits(),
            });
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        match op {
            GateOp::H { target } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_kernel(*target, 0, 0, Kernel::Real([[s, s], [s, -s]]));
            }
            GateOp::X { target } => self.apply_kernel(*target, 0, 0, Kernel::Pauli(Pauli::X)),
            GateOp::Ry { target, theta } => {
                self.apply_kernel(*target, 0, 0, ry_matrix(*theta));
            }
            GateOp::Cnot { control, target } => {
                let bit = 1 << control;
                self.apply_kernel(*target, bit, bit, Kernel::Pauli(Pauli::X));
            }
            GateOp::CRy {
                controls,
                target,
                theta,
            } => {
                let (mask, value) = controls.iter().fold((0, 0), |(m, v), c| {
                    let bit = 1 << c.qubit;
                    (m | bit, if c.polarity { v | bit } else { v })
                });
                self.apply_kernel(*target, mask, value, ry_matrix(*theta));
            }
            GateOp::CSwap { control, a, b } => {
                let (cbit, abit, bbit) = (1 << control, 1 << a, 1 << b);
                // visit indices with control=1, a=1, b=0 and swap with a=0, b=1
                let fixed = cbit | abit | bbit;
                for_each_index(self.num_qubits, fixed, cbit | abit, |i| {
                    self.amplitudes.swap(i, i ^ abit ^ bbit);
                });
            }
        }
        Ok(())
    }

    pub(crate) fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        self.apply_kernel(qubit, 0, 0, Kernel::Pauli(pauli));
    }

    fn apply_kernel(&mut self, target: usize, ctrl_mask: usize, ctrl_value: usize, k: Kernel) {
        let tbit = 1 << target;
        let amps = &mut self.amplitudes;
        for_each_index(self.num_qubits, ctrl_mask | tbit, ctrl_value, |i| {
            let j = i | tbit;
            let (a, b) = (amps[i], amps[j]);
            let (na, nb) = match k {
                Kernel::Real(m) => (a * m[0][0] + b * m[0][1], a * m[1][0] + b * m[1][1]),
                Kernel::Pauli(Pauli::X) => (b, a),
                Kernel::Pauli(Pauli::Y) => {
                    (Complex64::new(b.im, -b.re), Complex64::new(-a.im, a.re))
                }
                Kernel::Pauli(Pauli::Z) => (a, -b),
            };
            amps[i] = na;
            amps[j] = nb;
        });
    }

    /// Probability table over the listed qubits; outcome bit `b` is the
    /// value of `qubits[b]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Distribution> {
        validate_qubit_list(qubits, self.num_qubits)?;
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[gather_bits(i, qubits)] += a.norm_sqr();
        }
        Distribution::new(probs)
    }

    /// Projective measurement of `qubits`: samples an outcome, collapses the
    /// state onto it and renormalizes.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<usize> {
        let dist = self.marginal(qubits)?;
        let outcome = dist.sample_one(rng);
        let p = dist.probs()[outcome];
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if gather_bits(i, qubits) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Debug dump: `{"num_qubits": q, "amplitudes": {"<index>": [re, im]}}`.
    pub fn to_json(&self) -> Value {
        let amps: Map<String, Value> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (i.to_string(), json!([a.re, a.im])))
            .collect();
        json!({ "num_qubits": self.num_qubits, "amplitudes": amps })
    }
}

fn ry_matrix(theta: f64) -> Kernel {
    let (s, c) = (theta / 2.0).sin_cos();
    Kernel::Real([[c, -s], [s, c]])
}

pub(crate) fn validate_qubit_list(qubits: &[usize], num_qubits: usize) -> Result<()> {
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
    Ok(())
}

/// Packs the bits of `index` at positions `qubits` into an outcome number.
pub(crate) fn gather_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (b, &q)| acc | (((index >> q) & 1) << b))
}

/// Calls `f` for every basis index whose `fixed_mask` bits equal `fixed_value`,
/// in increasing order.
fn for_each_index(
    num_qubits: usize,
    fixed_mask: usize,
    fixed_value: usize,
    mut f: impl FnMut(usize),
) {
    let full = (1usize << num_qubits) - 1;
    let free = full & !fixed_mask;
    let mut s = 0usize;
    loop {
        f(s | fixed_value);
        if s == free {
            break;
        }
        s = s.wrapping_sub(free) & free;
    }
}
