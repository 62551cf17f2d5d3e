//! Acceptance checks, one test per criterion.
//!
//! Each check prints a single `PASS`/`FAIL` line with the measured numbers
//! and returns a byte report of everything it computed, which the
//! determinism check compares across two runs. Runtime limits are checked
//! separately from the report since wall time is not reproducible.

use std::time::{Duration, Instant};

use rand::Rng as _;

use qsl_core::harness::{check_complexity_against_circuit, median};
use qsl_core::locator::Layout;
use qsl_core::prep::{angles_from_amplitudes, prepare_fingerprint, prepare_psi, two_row_split};
use qsl_core::qsim::{max_qubits, run_circuit, sample_counts, Circuit, StateVector};
use qsl_core::rng::{derive_seed, stream};
use qsl_core::{
    analytic_distribution, build_positioning_circuit, ceil_log2, classical_locate,
    complexity_report, counts_to_similarity, evaluate, generate_synthetic, quantum_analytic_locate,
    quantum_locate, verify_swap_test_identities, AmplitudeMap, AmplitudeVector, Area, Dataset,
    EvalConfig, FingerprintDb, Location, Method, NoiseModel, NormalizationConfig, PathLossParams,
    QuantumOptions, Record, SamplingMode, Sweep,
};

const MASTER_SEED: u64 = 20_240_917;

// Worked example
const WORKED_PSI: [f64; 2] = [0.899, 0.437];
const WORKED_PHI: [[f64; 2]; 2] = [[0.800, 0.599], [0.543, 0.839]];
const WORKED_ANGLE_PSI: f64 = 0.905;
const WORKED_ANGLE_PHI0: f64 = 1.285;
const WORKED_ANGLE_PHI1: f64 = 1.992;
const WORKED_BASE_ANGLE: f64 = 1.638;
const WORKED_CORRECTION: f64 = -0.353;
const CORRECTION_MAGNITUDE: f64 = 0.3535;
const ANGLE_TOL: f64 = 1e-3;
const WORKED_EXPECTED_COUNT: f64 = 502.4;
/// The worked-example vectors carry three decimals; normalizing them before use
/// moves the expected count by about half a shot.
const EXPECTED_COUNT_TOL: f64 = 1.0;
const WORKED_SHOTS: u64 = 1024;
const WORKED_COUNT_RANGE: (u64, u64) = (454, 551);
const WORKED_SEEDS: u64 = 100;
const WORKED_MIN_WINS: usize = 90;
const WORKED_MAX_TIME: Duration = Duration::from_secs(1);

// Oracle comparisons
const ORACLE_INSTANCES: usize = 200;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_MAX_TIME: Duration = Duration::from_secs(30);
const IDENTITY_PAIRS: usize = 100;
const IDENTITY_TOL: f64 = 1e-9;
const INDEX_MARGINAL_TOL: f64 = 1e-12;
const ARGMAX_INSTANCES: usize = 500;

// Estimator convergence
const CONVERGENCE_PAIRS: usize = 200;
const CONVERGENCE_SLOPE: f64 = -0.5;
const CONVERGENCE_SLOPE_TOL: f64 = 0.1;
const CONVERGENCE_MAX_TIME: Duration = Duration::from_secs(120);

// Finite-shot accuracy
const ACCURACY_N: usize = 16;
const ACCURACY_M: usize = 64;
const ACCURACY_QUERIES: usize = 100;
const ACCURACY_SHOTS: u64 = 1 << 14;
const ACCURACY_MIN_AGREEMENT: f64 = 0.90;
const ACCURACY_MEDIAN_REL_TOL: f64 = 0.10;

// Preparation fidelity
const PREP_VECTORS: usize = 500;
const PREP_TOL: f64 = 1e-9;

// Noise trend
const NOISE_LEVELS: [f64; 3] = [0.0, 0.01, 0.05];
const NOISE_SEEDS: u64 = 20;
const NOISE_QUERIES: usize = 30;
const NOISE_SHOTS: u64 = 1024;

const SUITE_MAX_TIME: Duration = Duration::from_secs(600);
const MAX_AMPLITUDES: usize = 1 << 20;

/// Outcome of one criterion.
struct Check {
    id: u8,
    title: &'static str,
    passed: bool,
    summary: String,
    /// Every number the check computed, for the determinism comparison.
    report: Vec<u8>,
}

impl Check {
    fn new(id: u8, title: &'static str) -> Self {
        Check {
            id,
            title,
            passed: true,
            summary: String::new(),
            report: Vec::new(),
        }
    }

    /// Records a sub-check; a failing one fails the criterion.
    fn expect(&mut self, ok: bool, what: impl AsRef<str>) {
        self.passed &= ok;
        if !self.summary.is_empty() {
            self.summary.push_str("; ");
        }
        if !ok {
            self.summary.push_str("NOT ");
        }
        self.summary.push_str(what.as_ref());
    }

    fn record(&mut self, values: impl IntoIterator<Item = f64>) {
        for v in values {
            self.report.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }

    fn record_text(&mut self, text: &str) {
        self.report.extend_from_slice(text.as_bytes());
    }

    fn line(&self) -> String {
        format!(
            "{} criterion {}: {} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary
        )
    }

    fn finish(self) {
        println!("{}", self.line());
        assert!(self.passed, "{}", self.line());
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn random_raw(rng: &mut impl rand::Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        if v.iter().any(|x| *x > 1e-3) {
            return v;
        }
    }
}

fn random_unit(rng: &mut impl rand::Rng, n_qubits: usize) -> AmplitudeVector {
    AmplitudeVector::normalized(&random_raw(rng, 1 << n_qubits)).unwrap()
}

/// Swap-test ancilla probability computed directly on plain slices.
fn oracle_conditional(psi: &[f64], phi: &[f64]) -> f64 {
    let dot: f64 = psi.iter().zip(phi).map(|(a, b)| a * b).sum();
    0.5 + 0.5 * dot * dot
}

/// Database whose rows normalize to `rows` under the default shift-floor map.
fn db_from_amplitudes(rows: &[&[f64]]) -> FingerprintDb {
    let cfg = NormalizationConfig::default();
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Record {
            id: format!("phi{i}"),
            location: Location::new(50.0 * i as f64, 0.0),
            rss: to_dbm(r),
        })
        .collect();
    let ids = (0..rows[0].len()).map(|s| format!("bs{s}")).collect();
    FingerprintDb::new(ids, records, cfg).unwrap()
}

fn to_dbm(amps: &[f64]) -> Vec<f64> {
    amps.iter().map(|a| -110.0 + 100.0 * a).collect()
}

/// Square synthetic dataset with default path loss, normalized on the linear
/// milliwatt scale. With the default shift-by-floor map every station is
/// heard everywhere and all fingerprints end up nearly parallel, which
/// leaves a finite shot budget nothing to discriminate.
fn evaluation_dataset(side_m: f64, n: usize, m: usize, queries: usize, seed: u64) -> Dataset {
    let mut ds = generate_synthetic(
        Area::new(side_m, side_m).unwrap(),
        n,
        m,
        queries,
        &PathLossParams::default(),
        seed,
    )
    .unwrap();
    ds.fingerprint.normalization.map = AmplitudeMap::LinearMilliwatt;
    ds
}

// ---------------------------------------------------------------------------

fn worked_example(seed: u64) -> (Check, Duration) {
    let mut c = Check::new(1, "worked example");
    let start = Instant::now();

    let unit = |v: &[f64]| AmplitudeVector::normalized(v).unwrap();
    let psi = unit(&WORKED_PSI);
    let theta_psi = angles_from_amplitudes(&psi).levels()[0][0];
    let theta0 = angles_from_amplitudes(&unit(&WORKED_PHI[0])).levels()[0][0];
    let theta1 = angles_from_amplitudes(&unit(&WORKED_PHI[1])).levels()[0][0];
    let split = two_row_split(theta0, theta1);
    c.record([theta_psi, theta0, theta1, split.base, split.correction]);
    for (name, got, want) in [
        ("theta_psi", theta_psi, WORKED_ANGLE_PSI),
        ("theta_phi0", theta0, WORKED_ANGLE_PHI0),
        ("theta_phi1", theta1, WORKED_ANGLE_PHI1),
        ("base", split.base, WORKED_BASE_ANGLE),
    ] {
        c.expect(
            (got - want).abs() < ANGLE_TOL,
            format!(
                "{name} {got:.6} vs {want} (diff {:.2e})",
                (got - want).abs()
            ),
        );
    }
    let corr = split.correction.abs();
    c.expect(
        (corr - CORRECTION_MAGNITUDE).abs() < ANGLE_TOL
            && (split.correction - WORKED_CORRECTION).abs() < ANGLE_TOL,
        format!("correction {:.6}", split.correction),
    );

    let db = db_from_amplitudes(&[&WORKED_PHI[0], &WORKED_PHI[1]]);
    let sample = to_dbm(&WORKED_PSI);
    let oracle_count = oracle_conditional(&WORKED_PSI, &WORKED_PHI[0]) / 2.0 * WORKED_SHOTS as f64;
    let rows = db.amplitudes().unwrap();
    let expected = analytic_distribution(&psi, &rows).unwrap().joint[0][0] * WORKED_SHOTS as f64;
    c.record([oracle_count, expected]);
    c.expect(
        (expected - WORKED_EXPECTED_COUNT).abs() < EXPECTED_COUNT_TOL
            && (expected - oracle_count).abs() < EXPECTED_COUNT_TOL,
        format!("E[count(a=0,i=0)] {expected:.2} (hand oracle {oracle_count:.2})"),
    );

    let opts = |s: u64| QuantumOptions {
        shots: WORKED_SHOTS,
        seed: s,
        ..Default::default()
    };
    let first = quantum_locate(&db, &sample, &opts(seed)).unwrap();
    let count = first.raw_counts.as_ref().unwrap().joint(0, 0);
    c.expect(
        (WORKED_COUNT_RANGE.0..=WORKED_COUNT_RANGE.1).contains(&count),
        format!("seeded count {count}"),
    );
    let mut wins = 0;
    for i in 0..WORKED_SEEDS {
        let est = quantum_locate(&db, &sample, &opts(derive_seed(seed, i))).unwrap();
        c.record([est.raw_counts.unwrap().joint(0, 0) as f64]);
        wins += usize::from(est.winning_index == 0);
    }
    c.record([count as f64, wins as f64]);
    c.expect(
        wins >= WORKED_MIN_WINS,
        format!("index 0 won {wins}/{WORKED_SEEDS}"),
    );
    (c, start.elapsed())
}

fn oracle_equivalence(seed: u64) -> (Check, Duration) {
    let mut c = Check::new(2, "simulator equals analytic joint");
    let start = Instant::now();
    let mut rng = stream(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.random_range(1..=3);
        let m_rows = rng.random_range(1..=8);
        let psi = random_unit(&mut rng, n);
        let rows: Vec<AmplitudeVector> = (0..m_rows).map(|_| random_unit(&mut rng, n)).collect();
        let pc = build_positioning_circuit(&psi, &rows).unwrap();
        let sim = run_circuit(&pc.circuit, None, 0)
            .unwrap()
            .marginal(&pc.layout.measured())
            .unwrap();
        let width = ceil_log2(m_rows);
        let library = analytic_distribution(&psi, &rows)
            .unwrap()
            .to_outcome_distribution()
            .unwrap();
        for (outcome, &p) in sim.probs().iter().enumerate() {
            let (j, a) = (outcome & ((1 << width) - 1), outcome >> width);
            let oracle = rows.get(j).map_or(0.0, |r| {
                let cond = oracle_conditional(psi.values(), r.values());
                (if a == 0 { cond } else { 1.0 - cond }) / m_rows as f64
            });
            worst = worst
                .max((p - oracle).abs())
                .max((library.probs()[outcome] - oracle).abs());
        }
        c.record(sim.probs().iter().copied());
    }
    c.record([worst]);
    c.expect(
        worst < ORACLE_TOL,
        format!("{ORACLE_INSTANCES} instances, max deviation {worst:.2e}"),
    );
    (c, start.elapsed())
}

fn swap_test_identities(seed: u64) -> Check {
    let mut c = Check::new(3, "swap-test identities");
    let mut rng = stream(seed, 3);
    let (mut zeta_dev, mut cond_dev): (f64, f64) = (0.0, 0.0);
    for _ in 0..IDENTITY_PAIRS {
        let n = rng.random_range(1..=4);
        let (psi, phi) = (random_unit(&mut rng, n), random_unit(&mut rng, n));
        let r = verify_swap_test_identities(&psi, &phi).unwrap();
        let oracle = oracle_conditional(psi.values(), phi.values());
        zeta_dev = zeta_dev.max((r.zeta_norm - 2.0).abs());
        cond_dev = cond_dev.max((r.conditional_from_eta - oracle).abs());
        c.record([r.zeta_norm, r.conditional_from_eta]);
    }
    c.expect(
        zeta_dev < IDENTITY_TOL,
        format!("max |‖ζ‖-2| {zeta_dev:.2e}"),
    );
    c.expect(
        cond_dev < IDENTITY_TOL,
        format!("max |(‖η0‖/2)² - p(a=0|j)| {cond_dev:.2e}"),
    );

    let mut marg_dev: f64 = 0.0;
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.random_range(1..=4);
        let m_rows = rng.random_range(1..=64);
        let psi = random_unit(&mut rng, n);
        let rows: Vec<AmplitudeVector> = (0..m_rows).map(|_| random_unit(&mut rng, n)).collect();
        let d = analytic_distribution(&psi, &rows).unwrap();
        for j in 0..m_rows {
            marg_dev = marg_dev.max((d.index_marginal(j) - 1.0 / m_rows as f64).abs());
        }
    }
    c.record([zeta_dev, cond_dev, marg_dev]);
    c.expect(
        marg_dev < INDEX_MARGINAL_TOL,
        format!("max |p(i=j) - 1/M| {marg_dev:.2e}"),
    );
    c
}

fn argmax_equivalence(seed: u64) -> Check {
    let mut c = Check::new(4, "analytic winner equals classical winner");
    let mut rng = stream(seed, 4);
    let mut agree = 0;
    for inst in 0..ARGMAX_INSTANCES {
        let n_st = rng.random_range(2..=16);
        let m_rows = rng.random_range(1..=32);
        let reading = |rng: &mut qsl_core::rng::Rng| {
            if rng.random::<f64>() < 0.2 {
                -200.0
            } else {
                rng.random_range(-115.0..-30.0)
            }
        };
        let mut records = Vec::with_capacity(m_rows);
        while records.len() < m_rows {
            let rss: Vec<f64> = (0..n_st).map(|_| reading(&mut rng)).collect();
            if rss.iter().any(|&v| v > -109.0) {
                records.push(Record {
                    id: format!("r{}", records.len()),
                    location: Location::new(records.len() as f64, 0.0),
                    rss,
                });
            }
        }
        let sample = loop {
            let s: Vec<f64> = (0..n_st).map(|_| reading(&mut rng)).collect();
            if s.iter().any(|&v| v > -109.0) {
                break s;
            }
        };
        let ids = (0..n_st).map(|s| format!("bs{s}")).collect();
        let db = FingerprintDb::new(ids, records, NormalizationConfig::default()).unwrap();
        let q = quantum_analytic_locate(&db, &sample).unwrap();
        let cl = classical_locate(&db, &sample).unwrap();
        c.record([q.winning_index as f64, cl.winning_index as f64]);
        if q.winning_index == cl.winning_index {
            agree += 1;
        } else {
            eprintln!(
                "instance {inst}: analytic {} vs classical {}",
                q.winning_index, cl.winning_index
            );
        }
    }
    c.expect(
        agree == ARGMAX_INSTANCES,
        format!("{agree}/{ARGMAX_INSTANCES} winners agree"),
    );
    c
}

fn estimator_convergence(seed: u64) -> (Check, Duration) {
    let mut c = Check::new(5, "estimator RMSE scales as K^-1/2");
    let start = Instant::now();
    let mut rng = stream(seed, 5);
    let ks: Vec<u64> = (8..=16).map(|e| 1u64 << e).collect();
    let mut sq_err = vec![0.0; ks.len()];
    for p in 0..CONVERGENCE_PAIRS {
        let n = rng.random_range(1..=3);
        let (psi, phi) = (random_unit(&mut rng, n), random_unit(&mut rng, n));
        let truth = psi
            .values()
            .iter()
            .zip(phi.values())
            .map(|(a, b)| a * b)
            .sum::<f64>();
        let pc = build_positioning_circuit(&psi, std::slice::from_ref(&phi)).unwrap();
        let dist = run_circuit(&pc.circuit, None, 0)
            .unwrap()
            .marginal(&pc.layout.measured())
            .unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let counts =
                sample_counts(&dist, k, derive_seed(seed, (p * ks.len() + i) as u64), None)
                    .unwrap();
            let est = counts_to_similarity(&counts, 0).unwrap();
            sq_err[i] += (est - truth).powi(2);
        }
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).log2()).collect();
    let ys: Vec<f64> = sq_err
        .iter()
        .map(|s| (s / CONVERGENCE_PAIRS as f64).sqrt().log2())
        .collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 9.0, ys.iter().sum::<f64>() / 9.0);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    c.record(ys.iter().copied());
    c.record([slope]);
    c.expect(
        (slope - CONVERGENCE_SLOPE).abs() <= CONVERGENCE_SLOPE_TOL,
        format!(
            "log-log slope {slope:.4}, RMSE {:.4} at K=2^8 to {:.5} at K=2^16",
            ys[0].exp2(),
            ys[8].exp2()
        ),
    );
    (c, start.elapsed())
}

fn finite_shot_accuracy(seed: u64) -> Check {
    let mut c = Check::new(6, "finite-shot accuracy against classical");
    let ds = evaluation_dataset(
        450.0,
        ACCURACY_N,
        ACCURACY_M,
        ACCURACY_QUERIES,
        derive_seed(seed, 6),
    );
    let cfg = EvalConfig {
        methods: vec![Method::QuantumSampled, Method::Classical],
        shots: ACCURACY_SHOTS,
        seeds: vec![derive_seed(seed, 60)],
        ..Default::default()
    };
    let report = evaluate(&ds, &cfg).unwrap();
    let q = report.summary(0.0, Method::QuantumSampled).unwrap();
    let cl = report.summary(0.0, Method::Classical).unwrap();
    for r in &report.rows {
        c.record([r.winning_index as f64, r.error_m]);
        c.record_text(&r.input_digest);
    }
    c.expect(
        q.classical_agreement >= ACCURACY_MIN_AGREEMENT,
        format!(
            "winner agreement {:.0}% over {} queries",
            100.0 * q.classical_agreement,
            q.rows
        ),
    );
    let rel = (q.median_m - cl.median_m).abs() / cl.median_m;
    c.expect(
        rel <= ACCURACY_MEDIAN_REL_TOL,
        format!(
            "median error {:.1} m vs classical {:.1} m ({:.1}% apart)",
            q.median_m,
            cl.median_m,
            100.0 * rel
        ),
    );
    c
}

fn complexity_accounting() -> Check {
    let mut c = Check::new(7, "qubit and gate accounting");
    let mut mismatches = Vec::new();
    let mut tested = 0;
    for m in [1, 2, 3, 4, 5, 7, 8, 16, 33, 44, 64] {
        for n in [1, 2, 3, 4, 5, 8, 16, 21] {
            let layout = Layout::new(m, n);
            let formula = 1 + ceil_log2(m) + 2 * ceil_log2(n);
            if layout.num_qubits() > max_qubits() {
                continue;
            }
            tested += 1;
            match check_complexity_against_circuit(m, n) {
                Ok(r) if r.qubits_used == formula => c.record([r.qubits_used as f64]),
                _ => mismatches.push((m, n)),
            }
        }
    }
    c.expect(
        mismatches.is_empty(),
        format!("{tested} (M, N) shapes match the formula, mismatches {mismatches:?}"),
    );
    let small = complexity_report(4, 2, 1024).unwrap();
    c.expect(
        small.qubits_used == 5,
        format!("M=4, N=2 uses {} qubits", small.qubits_used),
    );
    let big = complexity_report(1024, 64, 1 << 14).unwrap();
    c.expect(
        big.shots == 16384,
        format!("K=2^14 reported as {}", big.shots),
    );
    c.record([small.qubits_used as f64, big.shots as f64]);
    c
}

fn preparation_fidelity(seed: u64) -> Check {
    let mut c = Check::new(8, "state preparation fidelity");
    let mut rng = stream(seed, 8);
    let mut psi_dev: f64 = 0.0;
    for _ in 0..PREP_VECTORS {
        let n = rng.random_range(1..=4);
        let target = random_unit(&mut rng, n);
        let reg: Vec<usize> = (0..n).collect();
        let mut circ = Circuit::new(n);
        circ.extend(prepare_psi(&target, &reg).unwrap().ops);
        let state = run_circuit(&circ, None, 0).unwrap();
        let expect = StateVector::from_real(target.values()).unwrap();
        for (a, b) in state.amplitudes().iter().zip(expect.amplitudes()) {
            psi_dev = psi_dev.max((a - b).norm());
        }
    }
    c.expect(
        psi_dev < PREP_TOL,
        format!("{PREP_VECTORS} sample vectors, max deviation {psi_dev:.2e}"),
    );

    let (mut fp_dev, mut padded_mass, mut padded_cases): (f64, f64, usize) = (0.0, 0.0, 0);
    for _ in 0..PREP_VECTORS {
        let n = rng.random_range(1..=4);
        let m_rows = rng.random_range(1..=16usize);
        let m = ceil_log2(m_rows);
        let rows: Vec<AmplitudeVector> = (0..m_rows).map(|_| random_unit(&mut rng, n)).collect();
        let index: Vec<usize> = (0..m).collect();
        let data: Vec<usize> = (m..m + n).collect();
        let mut circ = Circuit::new(m + n);
        circ.extend(prepare_fingerprint(&rows, &index, &data).unwrap().ops);
        let state = run_circuit(&circ, None, 0).unwrap();
        let scale = 1.0 / (m_rows as f64).sqrt();
        for (basis, amp) in state.amplitudes().iter().enumerate() {
            let (j, k) = (basis & ((1 << m) - 1), basis >> m);
            match rows.get(j) {
                Some(r) => {
                    fp_dev = fp_dev.max((amp.re - r.values()[k] * scale).abs() + amp.im.abs())
                }
                None => padded_mass += amp.norm_sqr(),
            }
        }
        padded_cases += usize::from(!m_rows.is_power_of_two());
    }
    c.record([psi_dev, fp_dev, padded_mass]);
    c.expect(
        fp_dev < PREP_TOL,
        format!("{PREP_VECTORS} fingerprint loads, max deviation {fp_dev:.2e}"),
    );
    c.expect(
        padded_mass == 0.0 && padded_cases > 0,
        format!("padded-index probability {padded_mass} over {padded_cases} padded instances"),
    );
    c
}

fn noise_trend(seed: u64) -> Check {
    let mut c = Check::new(9, "median error non-decreasing in noise");
    let ds = evaluation_dataset(200.0, 4, 16, NOISE_QUERIES, derive_seed(seed, 9));
    let seeds: Vec<u64> = (0..NOISE_SEEDS)
        .map(|i| derive_seed(seed, 90 + i))
        .collect();
    let cfg = EvalConfig {
        methods: vec![Method::QuantumSampled],
        sweep: Sweep::Noise(NOISE_LEVELS.to_vec()),
        shots: NOISE_SHOTS,
        seeds: seeds.clone(),
        noise: Some(NoiseModel::default()),
        mode: SamplingMode::Exact,
        ..Default::default()
    };
    let report = evaluate(&ds, &cfg).unwrap();
    let medians: Vec<f64> = NOISE_LEVELS
        .iter()
        .map(|&level| {
            let per_seed: Vec<f64> = seeds
                .iter()
                .map(|&s| {
                    let errs: Vec<f64> = report
                        .rows
                        .iter()
                        .filter(|r| r.sweep_value == level && r.seed == s)
                        .map(|r| r.error_m)
                        .collect();
                    median(&errs)
                })
                .collect();
            per_seed.iter().sum::<f64>() / per_seed.len() as f64
        })
        .collect();
    c.record(medians.iter().copied());
    c.expect(
        medians.windows(2).all(|w| w[0] <= w[1]),
        format!(
            "seed-averaged median error {:.2} / {:.2} / {:.2} m at depolarizing {:?}",
            medians[0], medians[1], medians[2], NOISE_LEVELS
        ),
    );
    c
}

/// Criteria 1 through 9 in order.
fn run_all(seed: u64) -> Vec<Check> {
    vec![
        worked_example(seed).0,
        oracle_equivalence(seed).0,
        swap_test_identities(seed),
        argmax_equivalence(seed),
        estimator_convergence(seed).0,
        finite_shot_accuracy(seed),
        complexity_accounting(),
        preparation_fidelity(seed),
        noise_trend(seed),
    ]
}

fn report_bytes(checks: &[Check]) -> Vec<u8> {
    let mut out = Vec::new();
    for c in checks {
        out.extend_from_slice(c.line().as_bytes());
        out.push(b'\n');
        out.extend_from_slice(&c.report);
    }
    out
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_worked_example() {
    let (mut c, elapsed) = worked_example(MASTER_SEED);
    c.expect(
        elapsed < WORKED_MAX_TIME,
        format!("runtime {:.3} s", elapsed.as_secs_f64()),
    );
    c.finish();
}

#[test]
fn criterion_02_oracle_equivalence() {
    let (mut c, elapsed) = oracle_equivalence(MASTER_SEED);
    c.expect(
        elapsed < ORACLE_MAX_TIME,
        format!("runtime {:.3} s", elapsed.as_secs_f64()),
    );
    c.finish();
}

#[test]
fn criterion_03_swap_test_identities() {
    swap_test_identities(MASTER_SEED).finish();
}

#[test]
fn criterion_04_argmax_equivalence() {
    argmax_equivalence(MASTER_SEED).finish();
}

#[test]
fn criterion_05_estimator_convergence() {
    let (mut c, elapsed) = estimator_convergence(MASTER_SEED);
    c.expect(
        elapsed < CONVERGENCE_MAX_TIME,
        format!("runtime {:.3} s", elapsed.as_secs_f64()),
    );
    c.finish();
}

#[test]
fn criterion_06_finite_shot_accuracy() {
    finite_shot_accuracy(MASTER_SEED).finish();
}

#[test]
fn criterion_07_complexity_accounting() {
    complexity_accounting().finish();
}

#[test]
fn criterion_08_preparation_fidelity() {
    preparation_fidelity(MASTER_SEED).finish();
}

#[test]
fn criterion_09_noise_trend() {
    noise_trend(MASTER_SEED).finish();
}

#[test]
fn criterion_10_determinism() {
    let mut c = Check::new(10, "bit-identical reruns");
    let (first, t1) = timed(|| report_bytes(&run_all(MASTER_SEED)));
    let (second, t2) = timed(|| report_bytes(&run_all(MASTER_SEED)));
    c.expect(
        first == second,
        format!("two full runs give {} identical report bytes", first.len()),
    );
    let full = t1.max(t2);
    c.expect(
        full <= SUITE_MAX_TIME,
        format!("slowest full run {:.1} s", full.as_secs_f64()),
    );
    c.expect(
        (1usize << max_qubits()) <= MAX_AMPLITUDES,
        format!("statevector cap 2^{} amplitudes", max_qubits()),
    );
    let widest = Layout::new(ACCURACY_M, ACCURACY_N).num_qubits();
    c.expect(widest <= 20, format!("widest circuit {widest} qubits"));
    c.finish();
}
