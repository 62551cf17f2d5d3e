use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::{rng, Error, Result};

/// Tolerance on the total probability mass accepted by [`Distribution::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Probability table over the `2^width` outcomes of `width` measured bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    width: usize,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "distribution length {len} is not a power of two"
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -1e-15) {
            return Err(Error::validation(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::validation(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(Distribution {
            width: len.trailing_zeros() as usize,
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Distribution after each outcome bit is independently flipped with
    /// probability `flip`.
    pub fn with_readout_flips(&self, flip: f64) -> Distribution {
        let mut probs = self.probs.clone();
        if flip > 0.0 {
            for b in 0..self.width {
                let bit = 1 << b;
                for y in 0..probs.len() {
                    if y & bit == 0 {
                        let (p0, p1) = (probs[y], probs[y | bit]);
                        probs[y] = (1.0 - flip) * p0 + flip * p1;
                        probs[y | bit] = flip * p0 + (1.0 - flip) * p1;
                    }
                }
            }
        }
        Distribution {
            probs,
            width: self.width,
        }
    }

    pub(crate) fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if r < acc {
                return i;
            }
        }
        // rounding left r above the accumulated mass
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// Multinomial draw of `shots` outcomes.
    pub(crate) fn sample_multinomial<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.probs.len()];
        let mut remaining = shots;
        let mut mass = 1.0;
        for (i, &p) in self.probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if i + 1 == self.probs.len() || mass <= 0.0 {
                counts[i] = remaining;
                break;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let k = if q >= 1.0 {
                remaining
            } else if q <= 0.0 {
                0
            } else {
                Binomial::new(remaining, q)
                    .expect("binomial parameter in [0, 1]")
                    .sample(rng)
            };
            counts[i] = k;
            remaining -= k;
            mass -= p;
        }
        counts
    }
}

/// Outcome counts over `total_shots` shots of `width` measured bits.
///
/// In the positioning layout the top measured bit is the ancilla and the
/// lower bits are the index register, so [`ShotCounts::joint`] reads
/// `count(a ∩ i=j)` directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    width: usize,
    counts: Vec<u64>,
    total_shots: u64,
}

impl ShotCounts {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let len = counts.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "count table length {len} is not a power of two >= 2"
            )));
        }
        Ok(ShotCounts {
            width: len.trailing_zeros() as usize,
            total_shots: counts.iter().sum(),
            counts,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn outcomes(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn record(&mut self, outcome: usize) {
        self.counts[outcome] += 1;
        self.total_shots += 1;
    }

    /// Number of index values addressable by the non-ancilla bits.
    pub fn index_len(&self) -> usize {
        1 << (self.width - 1)
    }

    /// `count(a = ancilla ∩ i = index)`.
    pub fn joint(&self, ancilla: u8, index: usize) -> u64 {
        debug_assert!(ancilla < 2 && index < self.index_len());
        self.counts[index | ((ancilla as usize) << (self.width - 1))]
    }

    /// `count(i = index)`.
    pub fn index_count(&self, index: usize) -> u64 {
        self.joint(0, index) + self.joint(1, index)
    }

    pub(crate) fn add(&mut self, other: &[u64]) {
        for (c, o) in self.counts.iter_mut().zip(other) {
            *c += o;
        }
        self.total_shots = self.counts.iter().sum();
    }
}

impl Serialize for ShotCounts {
    /// `{"a,j": count}` for every outcome with a non-zero count.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: BTreeMap<(u8, usize), u64> = (0..2u8)
            .flat_map(|a| (0..self.index_len()).map(move |j| (a, j)))
            .map(|(a, j)| ((a, j), self.joint(a, j)))
            .filter(|(_, c)| *c > 0)
            .collect();
        let mut map = serializer.serialize_map(Some(entries.len()))?;
        for ((a, j), c) in entries {
            map.serialize_entry(&format!("{a},{j}"), &c)?;
        }
        map.end()
    }
}

/// Draws `shots` outcomes from `dist`, deterministically in `seed`, with an
/// optional per-bit readout flip probability.
pub fn sample_counts(
    dist: &Distribution,
    shots: u64,
    seed: u64,
    readout_flip: Option<f64>,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::validation("number of shots must be at least 1"));
    }
    let total: f64 = dist.probs().iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::validation(format!(
            "distribution sums to {total}, not 1"
        )));
    }
    if dist.width() == 0 {
        return Err(Error::validation(
            "cannot sample a distribution over zero bits",
        ));
    }
    let flip = readout_flip.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&flip) {
        return Err(Error::validation(format!(
            "readout flip probability {flip} outside [0, 1]"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let counts = dist
        .with_readout_flips(flip)
        .sample_multinomial(shots, &mut rng);
    Ok(ShotCounts {
        width: dist.width(),
        total_shots: counts.iter().sum(),
        counts,
    })
}

pub(crate) fn empty_counts(width: usize) -> ShotCounts {
    ShotCounts {
        width,
        counts: vec![0; 1 << width],
        total_shots: 0,
    }
}
