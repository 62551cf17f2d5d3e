//! Sampling behaviour of the positioning circuit.

use rand::Rng as _;

use qsl_core::qsim::{run_circuit, sample_counts};
use qsl_core::rng::{derive_seed, stream};
use qsl_core::{
    build_positioning_circuit, quantum_locate, AmplitudeVector, FingerprintDb, Location,
    NormalizationConfig, QuantumOptions, Record, SelectionRule,
};

fn random_unit(rng: &mut qsl_core::rng::Rng, len: usize) -> AmplitudeVector {
    let v: Vec<f64> = (0..len).map(|_| 0.05 + rng.random::<f64>()).collect();
    AmplitudeVector::normalized(&v).unwrap()
}

#[test]
fn index_frequencies_are_uniform() {
    let mut rng = stream(17, 0);
    let k = 100_000u64;
    for m_rows in [2usize, 3, 5, 8] {
        let psi = random_unit(&mut rng, 4);
        let rows: Vec<_> = (0..m_rows).map(|_| random_unit(&mut rng, 4)).collect();
        let pc = build_positioning_circuit(&psi, &rows).unwrap();
        let dist = run_circuit(&pc.circuit, None, 0)
            .unwrap()
            .marginal(&pc.layout.measured())
            .unwrap();
        let counts = sample_counts(&dist, k, m_rows as u64, None).unwrap();
        let p = 1.0 / m_rows as f64;
        let sigma = (k as f64 * p * (1.0 - p)).sqrt();
        for j in 0..m_rows {
            let dev = (counts.index_count(j) as f64 - k as f64 * p).abs();
            assert!(dev <= 4.0 * sigma, "M={m_rows} j={j} off by {dev}");
        }
        for j in m_rows..counts.index_len() {
            assert_eq!(counts.index_count(j), 0);
        }
    }
}

#[test]
fn selection_rules_agree_with_enough_shots() {
    // worked-example vectors, stored as dBm above a -110 floor
    let rows = [[0.800, 0.599], [0.543, 0.839]];
    let to_dbm = |a: &[f64]| a.iter().map(|x| -110.0 + 100.0 * x).collect::<Vec<_>>();
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Record {
            id: i.to_string(),
            location: Location::new(i as f64, 0.0),
            rss: to_dbm(r),
        })
        .collect();
    let db = FingerprintDb::new(
        vec!["a".into(), "b".into()],
        records,
        NormalizationConfig::default(),
    )
    .unwrap();
    let sample = to_dbm(&[0.899, 0.437]);
    for i in 0..20 {
        let winner = |rule| {
            let opts = QuantumOptions {
                shots: 1 << 16,
                seed: derive_seed(5, i),
                rule,
                ..Default::default()
            };
            quantum_locate(&db, &sample, &opts).unwrap().winning_index
        };
        assert_eq!(winner(SelectionRule::AncillaZeroCount), 0);
        assert_eq!(winner(SelectionRule::ConditionalRatio), 0);
    }
}

#[test]
fn estimates_stay_in_unit_interval() {
    let mut rng = stream(3, 0);
    for i in 0..50 {
        let psi = random_unit(&mut rng, 2);
        let rows: Vec<_> = (0..3).map(|_| random_unit(&mut rng, 2)).collect();
        let pc = build_positioning_circuit(&psi, &rows).unwrap();
        let dist = run_circuit(&pc.circuit, None, 0)
            .unwrap()
            .marginal(&pc.layout.measured())
            .unwrap();
        let counts = sample_counts(&dist, 64, i, None).unwrap();
        for j in 0..3 {
            if let Ok(c) = qsl_core::counts_to_similarity(&counts, j) {
                assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
