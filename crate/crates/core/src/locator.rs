//! Fingerprint positioning by cosine similarity.
//!
//! The quantum path loads the online sample into one register and every
//! fingerprint row, entangled with an index register, into another; a swap
//! test then leaves the ancilla in `|0>` with probability
//! `½ + ½|<ψ|φ_j>|²` conditioned on index `j`. Since the index register is
//! uniform, the row with the most `(a=0, i=j)` shots is the most similar.
//!
//! [`analytic_distribution`] evaluates those probabilities in closed form and
//! serves as the oracle for the simulated circuit; [`classical_locate`] is
//! the direct O(MN) dot-product baseline.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::prep::{
    prepare_fingerprint, prepare_psi, rss_to_amplitudes, AmplitudeVector, NormalizationConfig,
};
use crate::qsim::{
    sample_circuit, Circuit, Distribution, GateOp, NoiseModel, SamplingMode, ShotCounts,
};
use crate::{ceil_log2, Error, Result};

/// Planar position in meters, or (longitude, latitude) in degrees when the
/// database is flagged [`CoordinateKind::Degrees`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Self {
        Location { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateKind {
    #[default]
    Meters,
    Degrees,
}

impl CoordinateKind {
    /// Distance in meters between two locations.
    pub fn distance_m(&self, a: Location, b: Location) -> f64 {
        match self {
            CoordinateKind::Meters => (a.x - b.x).hypot(a.y - b.y),
            CoordinateKind::Degrees => {
                const EARTH_RADIUS_M: f64 = 6_371_008.8;
                let (lat1, lat2) = (a.y.to_radians(), b.y.to_radians());
                let dlat = lat2 - lat1;
                let dlon = (b.x - a.x).to_radians();
                let h = (dlat / 2.0).sin().powi(2)
                    + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
                2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
            }
        }
    }
}

/// One RSS vector recorded at a known location.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub location: Location,
    /// dBm per station; missing readings hold the normalization sentinel.
    pub rss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintDb {
    pub station_ids: Vec<String>,
    pub records: Vec<Record>,
    pub normalization: NormalizationConfig,
    pub coordinates: CoordinateKind,
}

impl FingerprintDb {
    pub fn new(
        station_ids: Vec<String>,
        records: Vec<Record>,
        normalization: NormalizationConfig,
    ) -> Result<Self> {
        let db = FingerprintDb {
            station_ids,
            records,
            normalization,
            coordinates: CoordinateKind::Meters,
        };
        db.validate()?;
        Ok(db)
    }

    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::validation("fingerprint database is empty"));
        }
        if self.station_ids.is_empty() {
            return Err(Error::validation("fingerprint database has no stations"));
        }
        self.normalization.validate()?;
        for r in &self.records {
            if r.rss.len() != self.station_ids.len() {
                return Err(Error::validation(format!(
                    "record {} has {} readings for {} stations",
                    r.id,
                    r.rss.len(),
                    self.station_ids.len()
                )));
            }
            if !r.location.x.is_finite() || !r.location.y.is_finite() {
                return Err(Error::validation(format!(
                    "record {} has a non-finite location",
                    r.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_stations(&self) -> usize {
        self.station_ids.len()
    }

    pub fn locations(&self) -> Vec<Location> {
        self.records.iter().map(|r| r.location).collect()
    }

    /// Normalized fingerprint rows.
    pub fn amplitudes(&self) -> Result<Vec<AmplitudeVector>> {
        self.records
            .iter()
            .map(|r| {
                rss_to_amplitudes(&r.rss, &self.normalization).map_err(|e| match e {
                    Error::NoSignal => Error::validation(format!(
                        "fingerprint record {} hears no station above the floor",
                        r.id
                    )),
                    e => e,
                })
            })
            .collect()
    }

    /// Normalizes an online sample with the database's own config.
    pub fn normalize_sample(&self, rss: &[f64]) -> Result<AmplitudeVector> {
        if rss.len() != self.num_stations() {
            return Err(Error::DimensionMismatch {
                expected: self.num_stations(),
                actual: rss.len(),
            });
        }
        rss_to_amplitudes(rss, &self.normalization)
    }

    /// Keeps only the listed records, in the given order.
    pub fn select_records(&self, indices: &[usize]) -> Result<FingerprintDb> {
        let records = indices
            .iter()
            .map(|&i| {
                self.records
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::validation(format!("no record {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let db = FingerprintDb {
            records,
            ..self.clone()
        };
        db.validate()?;
        Ok(db)
    }

    /// Keeps only the listed station columns, in the given order.
    pub fn select_stations(&self, indices: &[usize]) -> Result<FingerprintDb> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.num_stations()) {
            return Err(Error::validation(format!("no station {bad}")));
        }
        let db = FingerprintDb {
            station_ids: indices
                .iter()
                .map(|&i| self.station_ids[i].clone())
                .collect(),
            records: self
                .records
                .iter()
                .map(|r| Record {
                    rss: indices.iter().map(|&i| r.rss[i]).collect(),
                    ..r.clone()
                })
                .collect(),
            ..self.clone()
        };
        db.validate()?;
        Ok(db)
    }
}

/// Qubit assignment of the positioning circuit: index register lowest, then
/// the fingerprint register, the sample register, and the ancilla on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    /// Index register width `⌈log₂ M⌉`.
    pub index_qubits: usize,
    /// Width `⌈log₂ N⌉` of each data register.
    pub data_qubits: usize,
}

impl Layout {
    pub fn new(num_rows: usize, vector_len: usize) -> Self {
        Layout {
            index_qubits: ceil_log2(num_rows),
            data_qubits: ceil_log2(vector_len),
        }
    }

    pub fn num_qubits(&self) -> usize {
        1 + self.index_qubits + 2 * self.data_qubits
    }

    pub fn index(&self) -> Range<usize> {
        0..self.index_qubits
    }

    pub fn phi(&self) -> Range<usize> {
        self.index_qubits..self.index_qubits + self.data_qubits
    }

    pub fn psi(&self) -> Range<usize> {
        let start = self.index_qubits + self.data_qubits;
        start..start + self.data_qubits
    }

    pub fn ancilla(&self) -> usize {
        self.index_qubits + 2 * self.data_qubits
    }

    /// Index register bits, then the ancilla as the top outcome bit.
    pub fn measured(&self) -> Vec<usize> {
        self.index()
            .chain(std::iter::once(self.ancilla()))
            .collect()
    }
}

/// The positioning circuit together with its per-stage gate tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct PositioningCircuit {
    pub circuit: Circuit,
    pub layout: Layout,
    pub num_rows: usize,
    pub psi_gates: usize,
    pub fingerprint_gates: usize,
    pub swap_test_gates: usize,
}

/// Builds the initialization, swap-test and measurement stages for `psi`
/// against every row of `rows`.
pub fn build_positioning_circuit(
    psi: &AmplitudeVector,
    rows: &[AmplitudeVector],
) -> Result<PositioningCircuit> {
    if rows.is_empty() {
        return Err(Error::validation("fingerprint has no rows"));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != psi.len()) {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            actual: bad.len(),
        });
    }
    let layout = Layout::new(rows.len(), psi.len());
    let psi_reg: Vec<usize> = layout.psi().collect();
    let phi_reg: Vec<usize> = layout.phi().collect();
    let index_reg: Vec<usize> = layout.index().collect();
    let ancilla = layout.ancilla();

    let psi_oracle = prepare_psi(psi, &psi_reg)?;
    let fp_oracle = prepare_fingerprint(rows, &index_reg, &phi_reg)?;

    let mut circuit = Circuit::new(layout.num_qubits());
    circuit.extend(psi_oracle.ops).extend(fp_oracle.ops);
    let swap_start = circuit.gate_count();
    circuit.push(GateOp::h(ancilla));
    for (&p, &f) in psi_reg.iter().zip(&phi_reg) {
        circuit.push(GateOp::cswap(ancilla, p, f));
    }
    circuit.push(GateOp::h(ancilla));
    let swap_test_gates = circuit.gate_count() - swap_start;
    circuit.measure(layout.measured());

    Ok(PositioningCircuit {
        circuit,
        layout,
        num_rows: rows.len(),
        psi_gates: psi_oracle.gate_count,
        fingerprint_gates: fp_oracle.gate_count,
        swap_test_gates,
    })
}

/// Closed-form outcome probabilities of the positioning circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticDistribution {
    /// `|<ψ|φ_j>|`.
    pub cosines: Vec<f64>,
    /// `p(a=0 | i=j) = ½ + ½ cos²`.
    pub conditional: Vec<f64>,
    /// `[p(a=0, i=j), p(a=1, i=j)]`; every index carries mass `1/M`.
    pub joint: Vec<[f64; 2]>,
}

impl AnalyticDistribution {
    pub fn num_rows(&self) -> usize {
        self.cosines.len()
    }

    /// `p(i=j)`.
    pub fn index_marginal(&self, j: usize) -> f64 {
        self.joint[j][0] + self.joint[j][1]
    }

    /// The joint laid out as the measured outcomes of the positioning
    /// circuit: index bits low, ancilla on top, padded indices zero.
    pub fn to_outcome_distribution(&self) -> Result<Distribution> {
        let width = ceil_log2(self.num_rows());
        let mut probs = vec![0.0; 2 << width];
        for (j, [p0, p1]) in self.joint.iter().enumerate() {
            probs[j] = *p0;
            probs[j | (1 << width)] = *p1;
        }
        Distribution::new(probs)
    }
}

pub fn analytic_distribution(
    psi: &AmplitudeVector,
    rows: &[AmplitudeVector],
) -> Result<AnalyticDistribution> {
    if rows.is_empty() {
        return Err(Error::validation("fingerprint has no rows"));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != psi.len()) {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            actual: bad.len(),
        });
    }
    let m = rows.len() as f64;
    let cosines: Vec<f64> = rows.iter().map(|r| psi.dot(r).abs()).collect();
    let conditional: Vec<f64> = cosines.iter().map(|c| 0.5 + 0.5 * c * c).collect();
    let joint = conditional.iter().map(|p| [p / m, (1.0 - p) / m]).collect();
    Ok(AnalyticDistribution {
        cosines,
        conditional,
        joint,
    })
}

/// `√max(2p̂ − 1, 0)` with `p̂ = count(a=0 ∩ i=j) / count(i=j)`.
pub fn counts_to_similarity(counts: &ShotCounts, j: usize) -> Result<f64> {
    if j >= counts.index_len() {
        return Err(Error::validation(format!(
            "index {j} outside the {}-entry index register",
            counts.index_len()
        )));
    }
    let seen = counts.index_count(j);
    if seen == 0 {
        return Err(Error::IndexNeverObserved(j));
    }
    let p = counts.joint(0, j) as f64 / seen as f64;
    Ok((2.0 * p - 1.0).max(0.0).sqrt())
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax_lowest<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v.partial_cmp(&b) != Some(std::cmp::Ordering::Greater) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    QuantumSampled,
    QuantumAnalytic,
    Classical,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::QuantumSampled => "quantum-sampled",
            Method::QuantumAnalytic => "quantum-analytic",
            Method::Classical => "classical",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" | "quantum-sampled" => Ok(Method::QuantumSampled),
            "quantum-analytic" => Ok(Method::QuantumAnalytic),
            "classical" => Ok(Method::Classical),
            other => Err(Error::validation(format!("unknown method {other:?}"))),
        }
    }
}

/// Which statistic of the sampled shots picks the winning row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Most shots with `a = 0` and `i = j`.
    #[default]
    AncillaZeroCount,
    /// Largest `count(a=0 ∩ i=j) / count(i=j)`; unobserved rows score 0.
    ConditionalRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumOptions {
    pub shots: u64,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
    pub mode: SamplingMode,
    pub rule: SelectionRule,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        QuantumOptions {
            shots: 1024,
            seed: 0,
            noise: None,
            mode: SamplingMode::Exact,
            rule: SelectionRule::AncillaZeroCount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationEstimate {
    pub method: Method,
    pub winning_index: usize,
    pub location: Location,
    /// Estimated cosine per row; `None` for rows never observed.
    #[serde(rename = "scores")]
    pub similarity_scores: Vec<Option<f64>>,
    #[serde(rename = "counts", skip_serializing_if = "Option::is_none")]
    pub raw_counts: Option<ShotCounts>,
    /// SHA-256 prefix of the normalized sample and fingerprint amplitudes.
    pub input_digest: String,
}

/// Normalized inputs of one query.
struct Prepared {
    psi: AmplitudeVector,
    rows: Vec<AmplitudeVector>,
    digest: String,
}

fn prepare(db: &FingerprintDb, sample: &[f64]) -> Result<Prepared> {
    db.validate()?;
    let psi = db.normalize_sample(sample)?;
    let rows = db.amplitudes()?;
    let digest = input_digest(&psi, &rows);
    Ok(Prepared { psi, rows, digest })
}

/// Digest of the exact bits of the normalized inputs.
pub fn input_digest(psi: &AmplitudeVector, rows: &[AmplitudeVector]) -> String {
    let mut hasher = Sha256::new();
    for v in std::iter::once(psi).chain(rows) {
        hasher.update((v.len() as u64).to_le_bytes());
        for x in v.values() {
            hasher.update(x.to_bits().to_le_bytes());
        }
    }
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Swap-test positioning from `opts.shots` sampled shots.
pub fn quantum_locate(
    db: &FingerprintDb,
    sample: &[f64],
    opts: &QuantumOptions,
) -> Result<LocationEstimate> {
    if opts.shots == 0 {
        return Err(Error::validation("number of shots must be at least 1"));
    }
    let input = prepare(db, sample)?;
    let pc = build_positioning_circuit(&input.psi, &input.rows)?;
    let counts = sample_circuit(
        &pc.circuit,
        opts.shots,
        opts.seed,
        opts.noise.as_ref(),
        opts.mode,
    )?;
    let m = db.len();
    let scores: Vec<Option<f64>> = (0..m)
        .map(|j| counts_to_similarity(&counts, j).ok())
        .collect();
    let winner = match opts.rule {
        SelectionRule::AncillaZeroCount => argmax_lowest((0..m).map(|j| counts.joint(0, j) as f64)),
        SelectionRule::ConditionalRatio => argmax_lowest((0..m).map(|j| {
            let seen = counts.index_count(j);
            if seen == 0 {
                0.0
            } else {
                counts.joint(0, j) as f64 / seen as f64
            }
        })),
    }
    .expect("non-empty database");
    Ok(LocationEstimate {
        method: Method::QuantumSampled,
        winning_index: winner,
        location: db.records[winner].location,
        similarity_scores: scores,
        raw_counts: Some(counts),
        input_digest: input.digest,
    })
}

/// Infinite-shot limit of [`quantum_locate`]: the row with the largest
/// exact `p(a=0, i=j)`.
pub fn quantum_analytic_locate(db: &FingerprintDb, sample: &[f64]) -> Result<LocationEstimate> {
    let input = prepare(db, sample)?;
    let dist = analytic_distribution(&input.psi, &input.rows)?;
    let winner = argmax_lowest(dist.joint.iter().map(|p| p[0])).expect("non-empty database");
    Ok(LocationEstimate {
        method: Method::QuantumAnalytic,
        winning_index: winner,
        location: db.records[winner].location,
        similarity_scores: dist
            .conditional
            .iter()
            .map(|p| Some((2.0 * p - 1.0).max(0.0).sqrt()))
            .collect(),
        raw_counts: None,
        input_digest: input.digest,
    })
}

/// Exact cosine against every row.
pub fn classical_locate(db: &FingerprintDb, sample: &[f64]) -> Result<LocationEstimate> {
    let input = prepare(db, sample)?;
    let scores: Vec<f64> = input.rows.iter().map(|r| input.psi.dot(r).abs()).collect();
    let winner = argmax_lowest(scores.iter().copied()).expect("non-empty database");
    Ok(LocationEstimate {
        method: Method::Classical,
        winning_index: winner,
        location: db.records[winner].location,
        similarity_scores: scores.into_iter().map(Some).collect(),
        raw_counts: None,
        input_digest: input.digest,
    })
}

pub fn locate(
    db: &FingerprintDb,
    sample: &[f64],
    method: Method,
    opts: &QuantumOptions,
) -> Result<LocationEstimate> {
    match method {
        Method::QuantumSampled => quantum_locate(db, sample, opts),
        Method::QuantumAnalytic => quantum_analytic_locate(db, sample),
        Method::Classical => classical_locate(db, sample),
    }
}

/// Norms of the swap-test branch vectors, built explicitly as tensor
/// products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapTestReport {
    /// `‖ζ‖` for `ζ = |0>(ψφ + φψ) + |1>(ψφ − φψ)`.
    pub zeta_norm: f64,
    /// `‖η₀‖²` for `η₀ = ψφ + φψ`.
    pub eta0_norm_sqr: f64,
    /// `‖η₁‖²` for `η₁ = ψφ − φψ`.
    pub eta1_norm_sqr: f64,
    /// `(‖η₀‖ / 2)²`.
    pub conditional_from_eta: f64,
    /// `½ + ½|<ψ|φ>|²`.
    pub conditional_closed_form: f64,
}

pub fn verify_swap_test_identities(
    psi: &AmplitudeVector,
    phi: &AmplitudeVector,
) -> Result<SwapTestReport> {
    if psi.len() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            actual: phi.len(),
        });
    }
    let kron = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect()
    };
    let psi_phi = kron(psi.values(), phi.values());
    let phi_psi = kron(phi.values(), psi.values());
    let eta0: Vec<f64> = psi_phi.iter().zip(&phi_psi).map(|(a, b)| a + b).collect();
    let eta1: Vec<f64> = psi_phi.iter().zip(&phi_psi).map(|(a, b)| a - b).collect();
    let zeta: Vec<f64> = eta0.iter().chain(&eta1).copied().collect();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let eta0_norm_sqr = sq(&eta0);
    let overlap = psi.dot(phi);
    Ok(SwapTestReport {
        zeta_norm: sq(&zeta).sqrt(),
        eta0_norm_sqr,
        eta1_norm_sqr: sq(&eta1),
        conditional_from_eta: (eta0_norm_sqr.sqrt() / 2.0).powi(2),
        conditional_closed_form: 0.5 + 0.5 * overlap * overlap,
    })
}
