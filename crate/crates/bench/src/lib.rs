//! Shared fixtures for the criterion benches.

use qsl_core::testbed::{generate_synthetic, Area, Dataset, PathLossParams};
use qsl_core::AmplitudeVector;

/// Synthetic dataset of `n` stations and `m` fingerprint records over a
/// 450 m square, with a handful of test samples.
pub fn dataset(n: usize, m: usize) -> Dataset {
    generate_synthetic(
        Area::new(450.0, 450.0).expect("valid area"),
        n,
        m,
        8,
        &PathLossParams::default(),
        42,
    )
    .expect("valid generator inputs")
}

/// Normalized (sample, rows) of the first test query of `ds`.
pub fn amplitudes(ds: &Dataset) -> (AmplitudeVector, Vec<AmplitudeVector>) {
    let psi = ds
        .fingerprint
        .normalize_sample(&ds.test_samples[0].rss)
        .expect("sample hears a station");
    let rows = ds.fingerprint.amplitudes().expect("rows hear a station");
    (psi, rows)
}
