//! Evaluation sweeps and complexity accounting.
//!
//! [`evaluate`] runs every test query of a dataset through the requested
//! methods, optionally across a sweep of fingerprint size, station count,
//! shot budget or noise level, and collects per-query errors with per-point
//! summaries and error CDFs. Queries run in parallel; each gets a seed
//! derived from the run seed and its query index, and rows come back in a
//! fixed order, so a report depends only on its inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::locator::{
    build_positioning_circuit, locate, FingerprintDb, Layout, Method, QuantumOptions, SelectionRule,
};
use crate::prep::{fingerprint_gate_count, psi_gate_count, AmplitudeVector, FingerprintStrategy};
use crate::qsim::{NoiseModel, SamplingMode};
use crate::testbed::Dataset;
use crate::{ceil_log2, rng, Error, Result};

pub const DEFAULT_SHOTS: u64 = 1024;

/// Shot budgets from 2^8 to 2^16.
pub fn default_k_sweep() -> Vec<u64> {
    (8..=16).map(|e| 1u64 << e).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    None,
    /// Fingerprint sizes; each is a prefix of one seeded permutation of the
    /// records, so smaller sets are nested in larger ones.
    M(Vec<usize>),
    /// Station counts, nested the same way over the station columns.
    N(Vec<usize>),
    /// Shot budgets.
    K(Vec<u64>),
    /// Depolarizing probabilities.
    Noise(Vec<f64>),
}

impl Sweep {
    pub fn axis(&self) -> &'static str {
        match self {
            Sweep::None => "none",
            Sweep::M(_) => "m",
            Sweep::N(_) => "n",
            Sweep::K(_) => "k",
            Sweep::Noise(_) => "noise",
        }
    }

    fn points(&self) -> Vec<f64> {
        match self {
            Sweep::None => vec![0.0],
            Sweep::M(v) | Sweep::N(v) => v.iter().map(|&x| x as f64).collect(),
            Sweep::K(v) => v.iter().map(|&x| x as f64).collect(),
            Sweep::Noise(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub methods: Vec<Method>,
    pub sweep: Sweep,
    pub shots: u64,
    /// One pass over the queries per seed.
    pub seeds: Vec<u64>,
    /// Base noise for the sampled method; a noise sweep overrides its
    /// depolarizing probability.
    pub noise: Option<NoiseModel>,
    pub mode: SamplingMode,
    pub rule: SelectionRule,
    /// Seed of the nested subsets drawn by M and N sweeps.
    pub subset_seed: u64,
    /// Evaluate only the first this-many test samples.
    pub max_queries: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            methods: vec![Method::QuantumSampled, Method::Classical],
            sweep: Sweep::None,
            shots: DEFAULT_SHOTS,
            seeds: vec![0],
            noise: None,
            mode: SamplingMode::Exact,
            rule: SelectionRule::AncillaZeroCount,
            subset_seed: 0,
            max_queries: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::validation("no methods to evaluate"));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("no seeds given"));
        }
        if self.shots == 0 {
            return Err(Error::validation("number of shots must be at least 1"));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        let empty = |v: usize| {
            if v == 0 {
                Err(Error::validation("sweep has no values"))
            } else {
                Ok(())
            }
        };
        match &self.sweep {
            Sweep::None => {}
            Sweep::M(v) => {
                empty(v.len())?;
                let m = ds.fingerprint.len();
                if let Some(bad) = v.iter().find(|&&x| x == 0 || x > m) {
                    return Err(Error::validation(format!(
                        "M = {bad} outside 1..={m} for this dataset"
                    )));
                }
            }
            Sweep::N(v) => {
                empty(v.len())?;
                let n = ds.num_stations();
                if let Some(bad) = v.iter().find(|&&x| x == 0 || x > n) {
                    return Err(Error::validation(format!(
                        "N = {bad} outside 1..={n} for this dataset"
                    )));
                }
            }
            Sweep::K(v) => {
                empty(v.len())?;
                if v.contains(&0) {
                    return Err(Error::validation("shot budgets must be at least 1"));
                }
            }
            Sweep::Noise(v) => {
                empty(v.len())?;
                for &p in v {
                    NoiseModel::depolarizing(p)?;
                }
            }
        }
        let points = self.sweep.points();
        if points
            .iter()
            .enumerate()
            .any(|(i, a)| points[..i].contains(a))
        {
            return Err(Error::validation("sweep values must be distinct"));
        }
        Ok(())
    }
}

/// One (query, sweep point, seed, method) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub sweep_value: f64,
    pub query: usize,
    pub loc_id: String,
    pub seed: u64,
    pub method: Method,
    /// Shots drawn; empty for the exact methods.
    pub shots: Option<u64>,
    pub true_x: f64,
    pub true_y: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub winning_index: usize,
    pub classical_index: usize,
    pub error_m: f64,
    pub input_digest: String,
}

impl EvalRow {
    pub fn matches_classical(&self) -> bool {
        self.winning_index == self.classical_index
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub sweep_value: f64,
    pub method: Method,
    pub rows: usize,
    pub median_m: f64,
    pub mean_m: f64,
    /// Share of rows picking the same record as the classical method.
    pub classical_agreement: f64,
    /// `(error_m, cumulative fraction)`, starting at `(0, 0)` and ending at
    /// fraction 1.
    pub cdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sweep_axis: String,
    pub rows: Vec<EvalRow>,
    pub summaries: Vec<PointSummary>,
}

impl EvalReport {
    pub fn summary(&self, sweep_value: f64, method: Method) -> Option<&PointSummary> {
        self.summaries
            .iter()
            .find(|s| s.sweep_value == sweep_value && s.method == method)
    }

    /// Writes `rows.csv`, `summary.csv` and `cdf.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let axis = &self.sweep_axis;

        let mut rows = csv_writer();
        rows.write_record([
            "sweep",
            "sweep_value",
            "query",
            "loc_id",
            "seed",
            "method",
            "shots",
            "true_x",
            "true_y",
            "est_x",
            "est_y",
            "winning_index",
            "classical_index",
            "error_m",
            "input_digest",
        ])
        .expect("write to memory");
        for r in &self.rows {
            rows.write_record([
                axis.clone(),
                r.sweep_value.to_string(),
                r.query.to_string(),
                r.loc_id.clone(),
                r.seed.to_string(),
                r.method.to_string(),
                r.shots.map(|k| k.to_string()).unwrap_or_default(),
                r.true_x.to_string(),
                r.true_y.to_string(),
                r.est_x.to_string(),
                r.est_y.to_string(),
                r.winning_index.to_string(),
                r.classical_index.to_string(),
                r.error_m.to_string(),
                r.input_digest.clone(),
            ])
            .expect("write to memory");
        }

        let mut summary = csv_writer();
        let mut cdf = csv_writer();
        summary
            .write_record([
                "sweep",
                "sweep_value",
                "method",
                "rows",
                "median_m",
                "mean_m",
                "classical_agreement",
            ])
            .expect("write to memory");
        cdf.write_record(["sweep", "sweep_value", "method", "error_m", "cdf"])
            .expect("write to memory");
        for s in &self.summaries {
            summary
                .write_record([
                    axis.clone(),
                    s.sweep_value.to_string(),
                    s.method.to_string(),
                    s.rows.to_string(),
                    s.median_m.to_string(),
                    s.mean_m.to_string(),
                    s.classical_agreement.to_string(),
                ])
                .expect("write to memory");
            for (x, y) in &s.cdf {
                cdf.write_record([
                    axis.clone(),
                    s.sweep_value.to_string(),
                    s.method.to_string(),
                    x.to_string(),
                    y.to_string(),
                ])
                .expect("write to memory");
            }
        }

        for (name, w) in [
            ("rows.csv", rows),
            ("summary.csv", summary),
            ("cdf.csv", cdf),
        ] {
            let path = dir.join(name);
            let bytes = w.into_inner().expect("flush to memory");
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

/// The database and query settings at one sweep point.
#[derive(Clone)]
struct Point {
    value: f64,
    db: FingerprintDb,
    station_cols: Option<Vec<usize>>,
    shots: u64,
    noise: Option<NoiseModel>,
}

fn nested_prefix(len: usize, take: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng::stream(seed, 0));
    let mut picked = order[..take].to_vec();
    picked.sort_unstable();
    picked
}

fn sweep_points(ds: &Dataset, cfg: &EvalConfig) -> Result<Vec<Point>> {
    let base = Point {
        value: 0.0,
        db: ds.fingerprint.clone(),
        station_cols: None,
        shots: cfg.shots,
        noise: cfg.noise,
    };
    cfg.sweep
        .points()
        .into_iter()
        .map(|value| {
            Ok(match &cfg.sweep {
                Sweep::None => Point {
                    value,
                    ..base.clone()
                },
                Sweep::M(_) => {
                    let keep = nested_prefix(ds.fingerprint.len(), value as usize, cfg.subset_seed);
                    Point {
                        value,
                        db: ds.fingerprint.select_records(&keep)?,
                        ..base.clone()
                    }
                }
                Sweep::N(_) => {
                    let cols = nested_prefix(ds.num_stations(), value as usize, cfg.subset_seed);
                    Point {
                        value,
                        db: ds.fingerprint.select_stations(&cols)?,
                        station_cols: Some(cols),
                        ..base.clone()
                    }
                }
                Sweep::K(_) => Point {
                    value,
                    shots: value as u64,
                    ..base.clone()
                },
                Sweep::Noise(_) => Point {
                    value,
                    noise: Some(NoiseModel {
                        depolarizing_prob: value,
                        ..cfg.noise.unwrap_or_default()
                    }),
                    ..base.clone()
                },
            })
        })
        .collect()
}

/// Evaluates every (sweep point, query, seed, method) combination.
///
/// All methods of one query see the same normalized inputs; a mismatch in
/// their input digests is reported as an invariant breach.
pub fn evaluate(ds: &Dataset, cfg: &EvalConfig) -> Result<EvalReport> {
    ds.validate()?;
    cfg.validate(ds)?;
    let queries = match cfg.max_queries {
        Some(q) => &ds.test_samples[..q.min(ds.test_samples.len())],
        None => &ds.test_samples[..],
    };
    if queries.is_empty() {
        return Err(Error::validation("dataset has no test samples"));
    }
    let points = sweep_points(ds, cfg)?;
    let coords = ds.fingerprint.coordinates;

    let mut tasks = Vec::new();
    for p in 0..points.len() {
        for q in 0..queries.len() {
            for &seed in &cfg.seeds {
                tasks.push((p, q, seed));
            }
        }
    }

    let rows: Vec<Vec<EvalRow>> = tasks
        .par_iter()
        .map(|&(p, q, seed)| -> Result<Vec<EvalRow>> {
            let point = &points[p];
            let query = &queries[q];
            let sample: Vec<f64> = match &point.station_cols {
                Some(cols) => cols.iter().map(|&c| query.rss[c]).collect(),
                None => query.rss.clone(),
            };
            let opts = QuantumOptions {
                shots: point.shots,
                seed: rng::derive_seed(seed, q as u64),
                noise: point.noise,
                mode: cfg.mode,
                rule: cfg.rule,
            };
            let reference = locate(&point.db, &sample, Method::Classical, &opts)?;
            let mut out = Vec::with_capacity(cfg.methods.len());
            for &method in &cfg.methods {
                let est = if method == Method::Classical {
                    reference.clone()
                } else {
                    locate(&point.db, &sample, method, &opts)?
                };
                if est.input_digest != reference.input_digest {
                    return Err(Error::Invariant(format!(
                        "query {q}: {method} saw inputs {} but classical saw {}",
                        est.input_digest, reference.input_digest
                    )));
                }
                out.push(EvalRow {
                    sweep_value: point.value,
                    query: q,
                    loc_id: query.id.clone(),
                    seed,
                    method,
                    shots: (method == Method::QuantumSampled).then_some(point.shots),
                    true_x: query.location.x,
                    true_y: query.location.y,
                    est_x: est.location.x,
                    est_y: est.location.y,
                    winning_index: est.winning_index,
                    classical_index: reference.winning_index,
                    error_m: coords.distance_m(query.location, est.location),
                    input_digest: est.input_digest,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<EvalRow> = rows.into_iter().flatten().collect();

    let mut groups: BTreeMap<(usize, Method), Vec<&EvalRow>> = BTreeMap::new();
    for (p, point) in points.iter().enumerate() {
        for r in rows.iter().filter(|r| r.sweep_value == point.value) {
            groups.entry((p, r.method)).or_default().push(r);
        }
    }
    let summaries = groups
        .into_iter()
        .map(|((p, method), rs)| {
            let errors: Vec<f64> = rs.iter().map(|r| r.error_m).collect();
            let agree = rs.iter().filter(|r| r.matches_classical()).count();
            PointSummary {
                sweep_value: points[p].value,
                method,
                rows: rs.len(),
                median_m: median(&errors),
                mean_m: errors.iter().sum::<f64>() / errors.len() as f64,
                classical_agreement: agree as f64 / rs.len() as f64,
                cdf: error_cdf(&errors),
            }
        })
        .collect();

    Ok(EvalReport {
        sweep_axis: cfg.sweep.axis().to_string(),
        rows,
        summaries,
    })
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Empirical CDF as `(x, F(x))` steps, prefixed with `(0, 0)`.
pub fn error_cdf(errors: &[f64]) -> Vec<(f64, f64)> {
    let mut v = errors.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    std::iter::once((0.0, 0.0))
        .chain(
            v.into_iter()
                .enumerate()
                .map(|(i, x)| (x, (i + 1) as f64 / n)),
        )
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub state_prep_psi: usize,
    pub state_prep_fingerprint: usize,
    pub state_prep: usize,
    /// `n` controlled swaps and two Hadamards on the ancilla.
    pub swap_test: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub m: usize,
    pub n: usize,
    pub index_qubits: usize,
    pub data_qubits: usize,
    pub qubits_used: usize,
    pub gate_counts: GateCounts,
    pub shots: u64,
    /// Gates executed when the circuit is re-prepared for every shot.
    pub quantum_ops_per_shot_preparation: u64,
    /// Gates in one pass of the circuit.
    pub quantum_ops_single_preparation: u64,
    /// Multiply-adds of the classical cosine scan.
    pub classical_ops: u64,
    pub claimed_asymptotic: String,
}

/// Resources of the positioning circuit for `m` records of `n` stations at
/// `shots` shots, counted on the gate set this crate emits.
pub fn complexity_report(m: usize, n: usize, shots: u64) -> Result<ComplexityReport> {
    if m == 0 || n == 0 {
        return Err(Error::validation("M and N must be at least 1"));
    }
    if shots == 0 {
        return Err(Error::validation("number of shots must be at least 1"));
    }
    let layout = Layout::new(m, n);
    let psi = psi_gate_count(layout.data_qubits);
    let fp = fingerprint_gate_count(m, layout.data_qubits, FingerprintStrategy::Auto);
    let swap = layout.data_qubits + 2;
    let total = psi + fp + swap;
    Ok(ComplexityReport {
        m,
        n,
        index_qubits: ceil_log2(m),
        data_qubits: ceil_log2(n),
        qubits_used: layout.num_qubits(),
        gate_counts: GateCounts {
            state_prep_psi: psi,
            state_prep_fingerprint: fp,
            state_prep: psi + fp,
            swap_test: swap,
            total,
        },
        shots,
        quantum_ops_per_shot_preparation: total as u64 * shots,
        quantum_ops_single_preparation: total as u64,
        classical_ops: m as u64 * n as u64,
        claimed_asymptotic: "O(log MN) per query assumes QRAM-style loading of the fingerprint \
            in time polylogarithmic in MN; with the explicit rotation cascades counted here, \
            loading costs O(MN) gates"
            .to_string(),
    })
}

/// Builds the circuit for random inputs of shape (m, n) and checks its
/// register sizes and gate count against [`complexity_report`].
pub fn check_complexity_against_circuit(m: usize, n: usize) -> Result<ComplexityReport> {
    let report = complexity_report(m, n, DEFAULT_SHOTS)?;
    let row = |k: usize| {
        let v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + k * 3) % 5) as f64).collect();
        AmplitudeVector::normalized(&v)
    };
    let rows = (0..m).map(row).collect::<Result<Vec<_>>>()?;
    let psi = row(m + 1)?;
    let pc = build_positioning_circuit(&psi, &rows)?;
    if pc.circuit.num_qubits != report.qubits_used
        || pc.circuit.gate_count() != report.gate_counts.total
        || pc.swap_test_gates != report.gate_counts.swap_test
    {
        return Err(Error::Invariant(format!(
            "M={m}, N={n}: circuit has {} qubits and {} gates, report says {} and {}",
            pc.circuit.num_qubits,
            pc.circuit.gate_count(),
            report.qubits_used,
            report.gate_counts.total
        )));
    }
    Ok(report)
}
