//! Synthetic RSS datasets and their on-disk format.
//!
//! A dataset directory holds three files:
//!
//! - `fingerprint.csv` and `test.csv`, both with header
//!   `loc_id,x_m,y_m,rss_<station_id>...`; an empty cell is a missing reading.
//! - `dataset.json`, carrying the seed, path-loss parameters, normalization
//!   config and station coordinates.
//!
//! Floats are written in Rust's shortest round-trip form, so loading a saved
//! dataset gives back the same bits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::locator::{CoordinateKind, FingerprintDb, Location, Record};
use crate::prep::{NormalizationConfig, MISSING_RSS_DBM};
use crate::{rng, Error, Result};

pub const FINGERPRINT_FILE: &str = "fingerprint.csv";
pub const TEST_FILE: &str = "test.csv";
pub const SIDECAR_FILE: &str = "dataset.json";

/// Log-distance path loss with log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub tx_power_dbm: f64,
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub shadowing_sigma_db: f64,
    /// Readings below this are not heard.
    pub noise_floor_dbm: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            tx_power_dbm: 30.0,
            path_loss_exponent: 3.0,
            reference_distance_m: 1.0,
            shadowing_sigma_db: 6.0,
            noise_floor_dbm: -110.0,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.tx_power_dbm,
            self.path_loss_exponent,
            self.reference_distance_m,
            self.shadowing_sigma_db,
            self.noise_floor_dbm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::validation("path-loss parameters must be finite"));
        }
        if self.path_loss_exponent <= 0.0 {
            return Err(Error::validation("path-loss exponent must be positive"));
        }
        if self.shadowing_sigma_db < 0.0 {
            return Err(Error::validation("shadowing sigma must be non-negative"));
        }
        if self.reference_distance_m <= 0.0 {
            return Err(Error::validation("reference distance must be positive"));
        }
        if self.noise_floor_dbm <= MISSING_RSS_DBM {
            return Err(Error::validation(format!(
                "noise floor must lie above the missing-reading sentinel {MISSING_RSS_DBM}"
            )));
        }
        Ok(())
    }

    /// Mean received power at `distance_m`; distances inside the reference
    /// distance are clamped to it.
    pub fn mean_rss(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.reference_distance_m);
        self.tx_power_dbm - 10.0 * self.path_loss_exponent * (d / self.reference_distance_m).log10()
    }

    /// Normalization config matching this model's hearability cutoff.
    pub fn normalization(&self) -> NormalizationConfig {
        NormalizationConfig {
            floor_dbm: self.noise_floor_dbm,
            ..NormalizationConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: String,
    pub x_m: f64,
    pub y_m: f64,
}

impl Station {
    pub fn location(&self) -> Location {
        Location::new(self.x_m, self.y_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub fn new(width_m: f64, height_m: f64) -> Result<Self> {
        if !(width_m.is_finite() && height_m.is_finite() && width_m > 0.0 && height_m > 0.0) {
            return Err(Error::validation(format!(
                "degenerate area {width_m} x {height_m}"
            )));
        }
        Ok(Area { width_m, height_m })
    }

    /// Most fingerprint locations the area holds, one per square meter.
    pub fn grid_capacity(&self) -> usize {
        (self.width_m.floor() * self.height_m.floor()) as usize
    }
}

impl std::str::FromStr for Area {
    type Err = Error;

    /// Parses `WIDTHxHEIGHT`, e.g. `450x450`.
    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::validation(format!("area {s:?} is not WIDTHxHEIGHT")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("area {s:?} is not WIDTHxHEIGHT")))
        };
        Area::new(parse(w)?, parse(h)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Generator seed; `None` for datasets not produced by
    /// [`generate_synthetic`].
    pub seed: Option<u64>,
    pub area: Option<Area>,
    pub params: Option<PathLossParams>,
    pub stations: Vec<Station>,
    pub fingerprint: FingerprintDb,
    pub test_samples: Vec<Record>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        self.fingerprint.validate()?;
        let ids: Vec<&str> = self.stations.iter().map(|s| s.id.as_str()).collect();
        if ids != self.fingerprint.station_ids {
            return Err(Error::validation(
                "station list differs from the fingerprint columns",
            ));
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        for t in &self.test_samples {
            if t.rss.len() != ids.len() {
                return Err(Error::validation(format!(
                    "test sample {} has {} readings for {} stations",
                    t.id,
                    t.rss.len(),
                    ids.len()
                )));
            }
        }
        Ok(())
    }

    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    /// Moves `count` seeded-random fingerprint records into the test set.
    pub fn holdout(&self, count: usize, seed: u64) -> Result<Dataset> {
        let m = self.fingerprint.len();
        if count == 0 || count >= m {
            return Err(Error::validation(format!(
                "holdout of {count} records needs 1 <= count < {m}"
            )));
        }
        let mut picked = sample_indices(&mut rng::stream(seed, 0), m, count).into_vec();
        picked.sort_unstable();
        let keep: Vec<usize> = (0..m)
            .filter(|i| picked.binary_search(i).is_err())
            .collect();
        let mut out = self.clone();
        out.fingerprint = self.fingerprint.select_records(&keep)?;
        out.test_samples = picked
            .iter()
            .map(|&i| self.fingerprint.records[i].clone())
            .chain(self.test_samples.iter().cloned())
            .collect();
        Ok(out)
    }
}

/// RSS heard at `at` from each station, with shadowing drawn from `rng` when
/// sigma is positive. Readings below the noise floor become the sentinel.
pub fn rss_at<R: rand::Rng + ?Sized>(
    params: &PathLossParams,
    stations: &[Station],
    at: Location,
    rng: &mut R,
) -> Vec<f64> {
    stations
        .iter()
        .map(|s| {
            let d = (s.x_m - at.x).hypot(s.y_m - at.y);
            let shadow = if params.shadowing_sigma_db > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                params.shadowing_sigma_db * z
            } else {
                0.0
            };
            let rss = params.mean_rss(d) + shadow;
            if rss < params.noise_floor_dbm {
                MISSING_RSS_DBM
            } else {
                rss
            }
        })
        .collect()
}

/// Generates `n` stations, `m` fingerprint records on a jittered grid and
/// `num_test` test samples at uniform random locations.
///
/// Each random quantity uses its own stream of `seed`, so for instance
/// changing `num_test` leaves the stations and fingerprint untouched.
pub fn generate_synthetic(
    area: Area,
    n: usize,
    m: usize,
    num_test: usize,
    params: &PathLossParams,
    seed: u64,
) -> Result<Dataset> {
    params.validate()?;
    let area = Area::new(area.width_m, area.height_m)?;
    if n == 0 || m == 0 || num_test == 0 {
        return Err(Error::validation(format!(
            "N, M and the number of test samples must be at least 1 (got {n}, {m}, {num_test})"
        )));
    }
    if m > area.grid_capacity() {
        return Err(Error::validation(format!(
            "{m} fingerprint locations exceed the grid capacity {} of a {} x {} m area",
            area.grid_capacity(),
            area.width_m,
            area.height_m
        )));
    }

    let mut station_rng = rng::stream(seed, 0);
    let stations: Vec<Station> = (0..n)
        .map(|i| Station {
            id: format!("bs{i}"),
            x_m: station_rng.random::<f64>() * area.width_m,
            y_m: station_rng.random::<f64>() * area.height_m,
        })
        .collect();

    let fp_locations = jittered_grid(area, m, seed);
    let mut shadow_rng = rng::stream(seed, 4);
    let records: Vec<Record> = fp_locations
        .into_iter()
        .enumerate()
        .map(|(i, loc)| Record {
            id: format!("fp{i}"),
            location: loc,
            rss: rss_at(params, &stations, loc, &mut shadow_rng),
        })
        .collect();

    let mut test_loc_rng = rng::stream(seed, 3);
    let test_locations: Vec<Location> = (0..num_test)
        .map(|_| {
            Location::new(
                test_loc_rng.random::<f64>() * area.width_m,
                test_loc_rng.random::<f64>() * area.height_m,
            )
        })
        .collect();
    let test_samples = test_locations
        .into_iter()
        .enumerate()
        .map(|(i, loc)| Record {
            id: format!("t{i}"),
            location: loc,
            rss: rss_at(params, &stations, loc, &mut shadow_rng),
        })
        .collect();

    let fingerprint = FingerprintDb {
        station_ids: stations.iter().map(|s| s.id.clone()).collect(),
        records,
        normalization: params.normalization(),
        coordinates: CoordinateKind::Meters,
    };
    let ds = Dataset {
        seed: Some(seed),
        area: Some(area),
        params: Some(*params),
        stations,
        fingerprint,
        test_samples,
    };
    ds.validate()?;
    Ok(ds)
}

/// `m` points, each in a distinct cell of a near-square grid over `area`,
/// jittered within the middle half of its cell.
fn jittered_grid(area: Area, m: usize, seed: u64) -> Vec<Location> {
    let aspect = area.width_m / area.height_m;
    let mut cols = ((m as f64 * aspect).sqrt().ceil() as usize).clamp(1, area.width_m as usize);
    let mut rows = m.div_ceil(cols);
    if rows > area.height_m as usize {
        rows = area.height_m as usize;
        cols = m.div_ceil(rows);
    }
    let (cw, ch) = (area.width_m / cols as f64, area.height_m / rows as f64);

    let mut cells = sample_indices(&mut rng::stream(seed, 1), rows * cols, m).into_vec();
    cells.sort_unstable();
    let mut jitter = rng::stream(seed, 2);
    cells
        .into_iter()
        .map(|c| {
            let (cx, cy) = ((c % cols) as f64, (c / cols) as f64);
            let jx = 0.25 + 0.5 * jitter.random::<f64>();
            let jy = 0.25 + 0.5 * jitter.random::<f64>();
            Location::new((cx + jx) * cw, (cy + jy) * ch)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<Area>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path_loss_params: Option<PathLossParams>,
    normalization: NormalizationConfig,
    #[serde(default)]
    coordinates: CoordinateKind,
    stations: Vec<Station>,
}

/// Writes the dataset into directory `dir`, creating it if needed.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    ds.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sidecar = Sidecar {
        seed: ds.seed,
        area: ds.area,
        path_loss_params: ds.params,
        normalization: ds.fingerprint.normalization,
        coordinates: ds.fingerprint.coordinates,
        stations: ds.stations.clone(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Invariant(format!("sidecar serialization: {e}")))?;
    json.push('\n');
    write_file(&dir.join(SIDECAR_FILE), json.as_bytes())?;

    let sentinel = ds.fingerprint.normalization.sentinel;
    let ids = &ds.fingerprint.station_ids;
    write_file(
        &dir.join(FINGERPRINT_FILE),
        &records_csv(ids, &ds.fingerprint.records, sentinel),
    )?;
    write_file(
        &dir.join(TEST_FILE),
        &records_csv(ids, &ds.test_samples, sentinel),
    )
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn records_csv(station_ids: &[String], records: &[Record], sentinel: f64) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = ["loc_id", "x_m", "y_m"]
        .into_iter()
        .map(String::from)
        .chain(station_ids.iter().map(|id| format!("rss_{id}")));
    w.write_record(header).expect("write to memory");
    for r in records {
        let row = [
            r.id.clone(),
            r.location.x.to_string(),
            r.location.y.to_string(),
        ]
        .into_iter()
        .chain(r.rss.iter().map(|&v| {
            if v.is_nan() || v <= sentinel {
                String::new()
            } else {
                v.to_string()
            }
        }));
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// Reads a dataset directory written by [`save_dataset`].
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let sidecar_path = dir.join(SIDECAR_FILE);
    let text = fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: sidecar_path.clone(),
        line: e.line() as u64,
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    sidecar.normalization.validate()?;

    let fp_path = dir.join(FINGERPRINT_FILE);
    let test_path = dir.join(TEST_FILE);
    let sentinel = sidecar.normalization.sentinel;
    let (fp_ids, records) = read_records(&fp_path, sentinel)?;
    let (test_ids, test_samples) = read_records(&test_path, sentinel)?;
    if fp_ids != test_ids {
        return Err(Error::validation(format!(
            "{} and {} list different stations",
            fp_path.display(),
            test_path.display()
        )));
    }
    let sidecar_ids: Vec<&str> = sidecar.stations.iter().map(|s| s.id.as_str()).collect();
    if fp_ids != sidecar_ids {
        return Err(Error::validation(format!(
            "{} lists different stations than {}",
            fp_path.display(),
            sidecar_path.display()
        )));
    }

    let ds = Dataset {
        seed: sidecar.seed,
        area: sidecar.area,
        params: sidecar.path_loss_params,
        stations: sidecar.stations,
        fingerprint: FingerprintDb {
            station_ids: fp_ids,
            records,
            normalization: sidecar.normalization,
            coordinates: sidecar.coordinates,
        },
        test_samples,
    };
    ds.validate()?;
    Ok(ds)
}

fn read_records(path: &Path, sentinel: f64) -> Result<(Vec<String>, Vec<Record>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: u64, column: Option<usize>, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(bytes.as_slice());
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, None, e.to_string()))?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 4 || cols[..3] != ["loc_id", "x_m", "y_m"] {
        return Err(parse_err(
            1,
            None,
            "header must be loc_id,x_m,y_m followed by rss_<station> columns".into(),
        ));
    }
    let mut station_ids = Vec::with_capacity(cols.len() - 3);
    for (k, c) in cols[3..].iter().enumerate() {
        match c.strip_prefix("rss_") {
            Some(id) if !id.is_empty() => station_ids.push(id.to_string()),
            _ => {
                return Err(parse_err(
                    1,
                    Some(k + 4),
                    format!("column {c:?} is not rss_<station>"),
                ))
            }
        }
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, None, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != cols.len() {
            return Err(parse_err(
                line,
                None,
                format!("expected {} fields, found {}", cols.len(), row.len()),
            ));
        }
        let number = |k: usize| -> Result<f64> {
            let cell = row[k].trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, Some(k + 1), format!("{cell:?} is not a number")))
        };
        let location = Location::new(number(1)?, number(2)?);
        let rss = (3..cols.len())
            .map(|k| {
                if row[k].trim().is_empty() {
                    Ok(sentinel)
                } else {
                    number(k)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(Record {
            id: row[0].to_string(),
            location,
            rss,
        });
    }
    Ok((station_ids, records))
}
