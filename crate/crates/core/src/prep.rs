//! Amplitude encoding of RSS vectors.
//!
//! A non-negative unit vector of length `2^n` is loaded into `n` qubits by a
//! binary tree of `Ry` rotations: the node covering a block of amplitudes
//! splits its weight between the left and right halves with
//! `θ = 2·atan2(‖right‖, ‖left‖)`, and level `k` of the tree is a rotation
//! on one qubit controlled on the `k` qubits above it.
//!
//! Fingerprint rows are loaded the same way, conditioned on the value of an
//! index register, giving `Σ_j |φ_j>|j> / √M`.

use serde::{Deserialize, Serialize};

use crate::qsim::{Control, GateOp};
use crate::{ceil_log2, Error, Result};

/// Unit-norm tolerance for [`AmplitudeVector::new`].
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Default value standing in for a station that was not heard.
pub const MISSING_RSS_DBM: f64 = -200.0;

/// Non-negative unit vector of length `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    values: Vec<f64>,
}

impl AmplitudeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::validation(format!(
                "amplitude {v} is negative or not finite"
            )));
        }
        let norm: f64 = values.iter().map(|v| v * v).sum();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::validation(format!(
                "amplitude vector has squared norm {norm}, not 1"
            )));
        }
        Ok(AmplitudeVector { values })
    }

    /// Zero-pads `raw` to the next power of two and scales it to unit norm.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::validation("empty amplitude vector"));
        }
        if let Some(v) = raw.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::validation(format!(
                "amplitude {v} is negative or not finite"
            )));
        }
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NoSignal);
        }
        let mut values: Vec<f64> = raw.iter().map(|v| v / norm).collect();
        values.resize(raw.len().next_power_of_two(), 0.0);
        Ok(AmplitudeVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Qubits needed to hold the vector.
    pub fn num_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn dot(&self, other: &AmplitudeVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Rotation angles of the preparation tree; level `k` has `2^k` angles
/// indexed by the value of the `k` bits above it.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSchedule {
    levels: Vec<Vec<f64>>,
}

impl AngleSchedule {
    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn num_qubits(&self) -> usize {
        self.levels.len()
    }

    /// Amplitudes produced by the schedule, as products of the half-angle
    /// cosines and sines along each root-to-leaf path.
    pub fn amplitudes(&self) -> Vec<f64> {
        let n = self.levels.len();
        (0..1usize << n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let half = self.levels[k][i >> (n - k)] / 2.0;
                        if (i >> (n - 1 - k)) & 1 == 0 {
                            half.cos()
                        } else {
                            half.sin()
                        }
                    })
                    .product()
            })
            .collect()
    }
}

pub fn angles_from_amplitudes(amps: &AmplitudeVector) -> AngleSchedule {
    AngleSchedule {
        levels: tree_angles(amps.values()),
    }
}

/// Tree angles for any non-negative vector of power-of-two length; blocks of
/// zero weight get angle 0.
fn tree_angles(values: &[f64]) -> Vec<Vec<f64>> {
    let n = values.len().trailing_zeros() as usize;
    (0..n)
        .map(|k| {
            let block = values.len() >> k;
            values
                .chunks(block)
                .map(|chunk| {
                    let (left, right) = chunk.split_at(block / 2);
                    2.0 * norm(right).atan2(norm(left))
                })
                .collect()
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gate sequence loading amplitudes into a register.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedOracle {
    pub ops: Vec<GateOp>,
    /// Qubits written by the fragment (index register first, if any).
    pub target_register: Vec<usize>,
    pub gate_count: usize,
}

impl PreparedOracle {
    fn new(ops: Vec<GateOp>, target_register: Vec<usize>) -> Self {
        PreparedOracle {
            gate_count: ops.len(),
            ops,
            target_register,
        }
    }
}

/// Emits the tree of rotations. `tree` lists the qubits most significant
/// first; `extra` controls are added to every gate.
fn cascade(levels: &[Vec<f64>], tree: &[usize], extra: &[Control]) -> Vec<GateOp> {
    let mut ops = Vec::new();
    for (k, angles) in levels.iter().enumerate() {
        for (pattern, &theta) in angles.iter().enumerate() {
            let controls = extra
                .iter()
                .copied()
                .chain(prefix_controls(&tree[..k], pattern))
                .collect();
            ops.push(GateOp::cry(controls, tree[k], theta));
        }
    }
    ops
}

/// Controls matching `pattern` on `qubits`, the first qubit being the most
/// significant bit of the pattern.
fn prefix_controls(qubits: &[usize], pattern: usize) -> impl Iterator<Item = Control> + '_ {
    let k = qubits.len();
    qubits.iter().enumerate().map(move |(c, &q)| Control {
        qubit: q,
        polarity: (pattern >> (k - 1 - c)) & 1 == 1,
    })
}

fn tree_order(register: &[usize]) -> Vec<usize> {
    register.iter().rev().copied().collect()
}

/// Oracle mapping `|0...0>` to `|ψ>` on `register` (register[k] holds bit k).
pub fn prepare_psi(amps: &AmplitudeVector, register: &[usize]) -> Result<PreparedOracle> {
    if register.len() != amps.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: amps.num_qubits(),
            actual: register.len(),
        });
    }
    let schedule = angles_from_amplitudes(amps);
    let ops = cascade(schedule.levels(), &tree_order(register), &[]);
    Ok(PreparedOracle::new(ops, register.to_vec()))
}

/// How fingerprint rows are conditioned on the index register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintStrategy {
    /// CNOT-conjugated two-angle form when there are exactly two rows,
    /// the generic cascade otherwise.
    #[default]
    Auto,
    /// One fully index-controlled rotation tree per row.
    Cascade,
    /// For two rows: a shared rotation by the mean angle followed by a
    /// CNOT-conjugated rotation by half the difference.
    CnotConjugated,
}

/// Shared rotation and signed correction that reproduce `theta0` when the
/// index qubit is `|0>` and `theta1` when it is `|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRowSplit {
    pub base: f64,
    pub correction: f64,
}

pub fn two_row_split(theta0: f64, theta1: f64) -> TwoRowSplit {
    TwoRowSplit {
        base: (theta0 + theta1) / 2.0,
        correction: (theta0 - theta1) / 2.0,
    }
}

/// Oracle producing `Σ_j |φ_j>|j> / √M` on (data, index) from `|0...0>`.
/// Index values `j >= M` get zero amplitude.
pub fn prepare_fingerprint(
    rows: &[AmplitudeVector],
    index_register: &[usize],
    data_register: &[usize],
) -> Result<PreparedOracle> {
    prepare_fingerprint_with(
        rows,
        index_register,
        data_register,
        FingerprintStrategy::Auto,
    )
}

pub fn prepare_fingerprint_with(
    rows: &[AmplitudeVector],
    index_register: &[usize],
    data_register: &[usize],
    strategy: FingerprintStrategy,
) -> Result<PreparedOracle> {
    let m_rows = rows.len();
    if m_rows == 0 {
        return Err(Error::validation("fingerprint has no rows"));
    }
    let n = rows[0].num_qubits();
    if let Some(bad) = rows.iter().find(|r| r.num_qubits() != n) {
        return Err(Error::DimensionMismatch {
            expected: rows[0].len(),
            actual: bad.len(),
        });
    }
    if data_register.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: data_register.len(),
        });
    }
    let m = ceil_log2(m_rows);
    if index_register.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: index_register.len(),
        });
    }
    let strategy = match strategy {
        FingerprintStrategy::Auto if m_rows == 2 => FingerprintStrategy::CnotConjugated,
        FingerprintStrategy::Auto => FingerprintStrategy::Cascade,
        FingerprintStrategy::CnotConjugated if m_rows != 2 => {
            return Err(Error::validation(format!(
                "CNOT-conjugated loading needs exactly 2 rows, got {m_rows}"
            )))
        }
        s => s,
    };

    let mut ops = Vec::with_capacity(fingerprint_gate_count(m_rows, n, strategy));
    let index_tree = tree_order(index_register);
    if m_rows.is_power_of_two() {
        ops.extend(index_register.iter().map(|&q| GateOp::h(q)));
    } else {
        let mut weights = vec![0.0; 1 << m];
        let w = 1.0 / (m_rows as f64).sqrt();
        weights[..m_rows].fill(w);
        ops.extend(cascade(&tree_angles(&weights), &index_tree, &[]));
    }

    let data_tree = tree_order(data_register);
    match strategy {
        FingerprintStrategy::CnotConjugated => {
            let index_qubit = index_register[0];
            let s0 = angles_from_amplitudes(&rows[0]);
            let s1 = angles_from_amplitudes(&rows[1]);
            for k in 0..n {
                for pattern in 0..(1usize << k) {
                    let split = two_row_split(s0.levels[k][pattern], s1.levels[k][pattern]);
                    let prefix: Vec<Control> = prefix_controls(&data_tree[..k], pattern).collect();
                    let target = data_tree[k];
                    ops.push(GateOp::cry(prefix.clone(), target, split.base));
                    ops.push(GateOp::cnot(index_qubit, target));
                    ops.push(GateOp::cry(prefix, target, split.correction));
                    ops.push(GateOp::cnot(index_qubit, target));
                }
            }
        }
        _ => {
            for (j, row) in rows.iter().enumerate() {
                let index_controls: Vec<Control> = index_register
                    .iter()
                    .enumerate()
                    .map(|(b, &q)| Control {
                        qubit: q,
                        polarity: (j >> b) & 1 == 1,
                    })
                    .collect();
                let schedule = angles_from_amplitudes(row);
                ops.extend(cascade(schedule.levels(), &data_tree, &index_controls));
            }
        }
    }

    let target = index_register
        .iter()
        .chain(data_register)
        .copied()
        .collect();
    Ok(PreparedOracle::new(ops, target))
}

/// Gates emitted by [`prepare_psi`] for an `n`-qubit register.
pub fn psi_gate_count(n: usize) -> usize {
    (1 << n) - 1
}

/// Gates emitted by [`prepare_fingerprint_with`] for `m_rows` rows of
/// `n`-qubit vectors.
pub fn fingerprint_gate_count(m_rows: usize, n: usize, strategy: FingerprintStrategy) -> usize {
    let m = ceil_log2(m_rows);
    let index_gates = if m_rows.is_power_of_two() {
        m
    } else {
        (1 << m) - 1
    };
    let per_node = match strategy {
        FingerprintStrategy::CnotConjugated => 4,
        FingerprintStrategy::Auto if m_rows == 2 => 4,
        _ => m_rows,
    };
    index_gates + per_node * ((1 << n) - 1)
}

/// How raw dBm readings become non-negative amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMap {
    /// `max(rss - floor, 0)`.
    #[default]
    ShiftFloor,
    /// Received power in milliwatts, zero at or below the floor.
    LinearMilliwatt,
}

/// Mapping from an RSS vector in dBm to an [`AmplitudeVector`]. Shared by the
/// fingerprint and every online sample so their cosines are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    #[serde(default)]
    pub map: AmplitudeMap,
    pub floor_dbm: f64,
    /// Readings at or below this value (or non-finite) mean "not heard".
    pub sentinel: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling_dbm: Option<f64>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            map: AmplitudeMap::ShiftFloor,
            floor_dbm: -110.0,
            sentinel: MISSING_RSS_DBM,
            ceiling_dbm: None,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.floor_dbm.is_finite() || !self.sentinel.is_finite() {
            return Err(Error::validation("floor and sentinel must be finite"));
        }
        if self.sentinel >= self.floor_dbm {
            return Err(Error::validation(format!(
                "sentinel {} must lie below the floor {}",
                self.sentinel, self.floor_dbm
            )));
        }
        if let Some(ceiling) = self.ceiling_dbm {
            if ceiling.partial_cmp(&self.floor_dbm) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::validation(format!(
                    "floor {} must lie below the ceiling {ceiling}",
                    self.floor_dbm
                )));
            }
        }
        Ok(())
    }

    pub fn is_missing(&self, rss: f64) -> bool {
        !rss.is_finite() || rss <= self.sentinel
    }

    /// Unnormalized amplitude of one reading.
    pub fn raw_amplitude(&self, rss: f64) -> f64 {
        if self.is_missing(rss) {
            return 0.0;
        }
        let rss = self.ceiling_dbm.map_or(rss, |c| rss.min(c));
        match self.map {
            AmplitudeMap::ShiftFloor => (rss - self.floor_dbm).max(0.0),
            AmplitudeMap::LinearMilliwatt if rss > self.floor_dbm => 10f64.powf(rss / 10.0),
            AmplitudeMap::LinearMilliwatt => 0.0,
        }
    }
}

/// Maps `rss` through `cfg`, zero-pads to a power of two and normalizes.
pub fn rss_to_amplitudes(rss: &[f64], cfg: &NormalizationConfig) -> Result<AmplitudeVector> {
    if rss.is_empty() {
        return Err(Error::validation("RSS vector is empty"));
    }
    cfg.validate()?;
    let raw: Vec<f64> = rss.iter().map(|&v| cfg.raw_amplitude(v)).collect();
    AmplitudeVector::normalized(&raw)
}
