//! `qsl`: generate synthetic RSS datasets, locate samples, run evaluation
//! sweeps and print circuit resource counts.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O or parse failure,
//! 4 internal invariant breach.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qsl_core::harness::{default_k_sweep, DEFAULT_SHOTS};
use qsl_core::locator::locate;
use qsl_core::prep::MISSING_RSS_DBM;
use qsl_core::{
    complexity_report, evaluate, generate_synthetic, load_dataset, save_dataset, AmplitudeMap,
    Area, Error, EvalConfig, Method, NoiseModel, NormalizationConfig, PathLossParams,
    QuantumOptions, SamplingMode, SelectionRule, Sweep,
};

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum swap-test fingerprint positioning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic path-loss dataset
    Generate(GenerateArgs),
    /// Locate one sample against a dataset's fingerprint
    Locate(LocateArgs),
    /// Evaluate methods over a dataset's test samples
    Evaluate(EvaluateArgs),
    /// Print qubit, gate and operation counts for a problem size
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of base stations
    #[arg(long, default_value_t = 21)]
    n: usize,
    /// Number of fingerprint locations
    #[arg(long, default_value_t = 44)]
    m: usize,
    /// Number of test samples
    #[arg(long, default_value_t = 44)]
    num_test: usize,
    /// Area in meters, WIDTHxHEIGHT
    #[arg(long, default_value = "450x450")]
    area: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// TOML file with [path_loss] and [normalization] tables
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tx_power: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Noise floor in dBm
    #[arg(long, allow_hyphen_values = true)]
    floor: Option<f64>,
}

#[derive(Args)]
struct NoiseArgs {
    /// Per-gate depolarizing probability
    #[arg(long, default_value_t = 0.0)]
    depolarizing: f64,
    /// Per-bit readout flip probability
    #[arg(long, default_value_t = 0.0)]
    readout: f64,
    /// Re-run the circuit for every shot instead of sampling its marginal
    #[arg(long)]
    trajectory: bool,
    /// Statistic that picks the winner from sampled shots
    #[arg(long, value_enum, default_value_t = RuleArg::Count)]
    rule: RuleArg,
}

impl NoiseArgs {
    fn noise(&self) -> Result<Option<NoiseModel>, Error> {
        let n = NoiseModel::new(self.depolarizing, self.readout)?;
        Ok((n != NoiseModel::default()).then_some(n))
    }

    fn mode(&self) -> SamplingMode {
        if self.trajectory {
            SamplingMode::Trajectory
        } else {
            SamplingMode::Exact
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    /// Most (a=0, i=j) shots
    Count,
    /// Largest fraction of a=0 among i=j shots
    Ratio,
}

impl From<RuleArg> for SelectionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Count => SelectionRule::AncillaZeroCount,
            RuleArg::Ratio => SelectionRule::ConditionalRatio,
        }
    }
}

#[derive(Args)]
struct LocateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Index of a test sample in the dataset
    #[arg(long, conflicts_with = "rss", required_unless_present = "rss")]
    sample: Option<usize>,
    /// Comma-separated dBm readings; leave a field empty for a missing one
    #[arg(long, allow_hyphen_values = true)]
    rss: Option<String>,
    /// quantum, quantum-analytic or classical
    #[arg(long, default_value = "quantum")]
    method: String,
    /// Shots
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    None,
    M,
    N,
    K,
    Noise,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated methods
    #[arg(long, default_value = "quantum,classical")]
    methods: String,
    #[arg(long, value_enum, default_value_t = SweepAxis::None)]
    sweep: SweepAxis,
    /// Comma-separated sweep values; each axis has a preset
    #[arg(long)]
    values: Option<String>,
    /// Shots
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    k: u64,
    /// Comma-separated run seeds
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Seed of the nested record and station subsets
    #[arg(long, default_value_t = 0)]
    subset_seed: u64,
    /// Evaluate only the first this-many test samples
    #[arg(long)]
    max_queries: Option<usize>,
    /// Directory for rows.csv, summary.csv and cdf.csv
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Shots
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    k: u64,
}

/// Optional overrides read from `generate --config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    path_loss: PathLossToml,
    #[serde(default)]
    normalization: NormalizationToml,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathLossToml {
    tx_power_dbm: Option<f64>,
    path_loss_exponent: Option<f64>,
    reference_distance_m: Option<f64>,
    shadowing_sigma_db: Option<f64>,
    noise_floor_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizationToml {
    map: Option<AmplitudeMap>,
    floor_dbm: Option<f64>,
    sentinel: Option<f64>,
    ceiling_dbm: Option<f64>,
}

fn read_config(path: &Path) -> Result<ConfigFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| {
                let before = &text[..s.start];
                let line = before.matches('\n').count() + 1;
                let column = s.start - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (line as u64, Some(column))
            })
            .unwrap_or((0, None));
        Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Validation(format!("invalid {what} {v:?}")))
        })
        .collect()
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Error> {
    let cfg = match &a.config {
        Some(p) => read_config(p)?,
        None => ConfigFile::default(),
    };
    let d = PathLossParams::default();
    let pl = &cfg.path_loss;
    let params = PathLossParams {
        tx_power_dbm: a.tx_power.or(pl.tx_power_dbm).unwrap_or(d.tx_power_dbm),
        path_loss_exponent: a
            .exponent
            .or(pl.path_loss_exponent)
            .unwrap_or(d.path_loss_exponent),
        reference_distance_m: a
            .d0
            .or(pl.reference_distance_m)
            .unwrap_or(d.reference_distance_m),
        shadowing_sigma_db: a
            .sigma
            .or(pl.shadowing_sigma_db)
            .unwrap_or(d.shadowing_sigma_db),
        noise_floor_dbm: a.floor.or(pl.noise_floor_dbm).unwrap_or(d.noise_floor_dbm),
    };
    let area: Area = a.area.parse()?;
    let mut ds = generate_synthetic(area, a.n, a.m, a.num_test, &params, a.seed)?;

    let base = ds.fingerprint.normalization;
    let nt = &cfg.normalization;
    let normalization = NormalizationConfig {
        map: nt.map.unwrap_or(base.map),
        floor_dbm: nt.floor_dbm.unwrap_or(base.floor_dbm),
        sentinel: nt.sentinel.unwrap_or(base.sentinel),
        ceiling_dbm: nt.ceiling_dbm.or(base.ceiling_dbm),
    };
    normalization.validate()?;
    ds.fingerprint.normalization = normalization;
    // the fingerprint must stay usable under the chosen normalization
    ds.fingerprint.amplitudes()?;

    save_dataset(&ds, &a.out)?;
    println!(
        "wrote {} stations, {} fingerprint records and {} test samples to {}",
        ds.num_stations(),
        ds.fingerprint.len(),
        ds.test_samples.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_locate(a: LocateArgs) -> Result<(), Error> {
    let ds = load_dataset(&a.dataset)?;
    let sample: Vec<f64> = match (&a.rss, a.sample) {
        (Some(rss), _) => rss
            .split(',')
            .map(|v| {
                let v = v.trim();
                if v.is_empty() {
                    Ok(MISSING_RSS_DBM)
                } else {
                    v.parse()
                        .map_err(|_| Error::Validation(format!("invalid RSS value {v:?}")))
                }
            })
            .collect::<Result<_, _>>()?,
        (None, Some(i)) => ds
            .test_samples
            .get(i)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "sample {i} out of range: dataset has {} test samples",
                    ds.test_samples.len()
                ))
            })?
            .rss
            .clone(),
        (None, None) => return Err(Error::Validation("give --sample or --rss".into())),
    };
    let method: Method = a.method.parse()?;
    let opts = QuantumOptions {
        shots: a.k,
        seed: a.seed,
        noise: a.noise.noise()?,
        mode: a.noise.mode(),
        rule: a.noise.rule.into(),
    };
    let est = locate(&ds.fingerprint, &sample, method, &opts)?;
    print_json(&est)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), Error> {
    let ds = load_dataset(&a.dataset)?;
    let methods = list::<Method>(&a.methods, "method")?;
    let values = a.values.as_deref();
    let sweep = match a.sweep {
        SweepAxis::None => Sweep::None,
        SweepAxis::M => Sweep::M(match values {
            Some(v) => list(v, "M")?,
            None => [4, 8, 16, 32, 44]
                .into_iter()
                .filter(|&m| m <= ds.fingerprint.len())
                .collect(),
        }),
        SweepAxis::N => Sweep::N(match values {
            Some(v) => list(v, "N")?,
            None => [2, 4, 8, 16, 21]
                .into_iter()
                .filter(|&n| n <= ds.num_stations())
                .collect(),
        }),
        SweepAxis::K => Sweep::K(match values {
            Some(v) => list(v, "K")?,
            None => default_k_sweep(),
        }),
        SweepAxis::Noise => Sweep::Noise(match values {
            Some(v) => list(v, "noise level")?,
            None => vec![0.0, 0.01, 0.05],
        }),
    };
    let cfg = EvalConfig {
        methods,
        sweep,
        shots: a.k,
        seeds: list(&a.seeds, "seed")?,
        noise: a.noise.noise()?,
        mode: a.noise.mode(),
        rule: a.noise.rule.into(),
        subset_seed: a.subset_seed,
        max_queries: a.max_queries,
    };
    let report = evaluate(&ds, &cfg)?;
    report.write_csv(&a.out)?;
    println!("sweep,sweep_value,method,rows,median_m,mean_m,classical_agreement");
    for s in &report.summaries {
        println!(
            "{},{},{},{},{:.3},{:.3},{:.4}",
            report.sweep_axis,
            s.sweep_value,
            s.method,
            s.rows,
            s.median_m,
            s.mean_m,
            s.classical_agreement
        );
    }
    Ok(())
}

fn cmd_complexity(a: ComplexityArgs) -> Result<(), Error> {
    print_json(&complexity_report(a.m, a.n, a.k)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    let s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invariant(format!("JSON serialization failed: {e}")))?;
    println!("{s}");
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Parse { .. } => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Locate(a) => cmd_locate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Complexity(a) => cmd_complexity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
