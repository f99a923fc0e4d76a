//! Error taxonomy, flag/config enums, config-file schemas, and input
//! loading. Flags win over the config file, which wins over defaults;
//! unknown config keys are rejected.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use farrlaw::idea::{FitMethod, FitTarget};
use farrlaw::timeseries::{
    aggregate_to_generations, cumulative_to_pseudo_incidence, ingest_csv, CsvSchema,
    GenerationSeries, SeriesKind,
};

/// CLI failure carrying the exit-status contract: 1 for usage and config
/// problems, 2 for data problems, 3 for fit or estimation problems.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Model(m) => f.write_str(m),
        }
    }
}

impl From<farrlaw::Error> for CliError {
    fn from(e: farrlaw::Error) -> Self {
        match &e {
            farrlaw::Error::Fit(_) | farrlaw::Error::Estimation(_) => {
                CliError::Model(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Cumulative,
    Incident,
    Generations,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    Incidence,
    Cumulative,
}

impl From<TargetArg> for FitTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Incidence => FitTarget::Incidence,
            TargetArg::Cumulative => FitTarget::Cumulative,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    #[value(name = "log_linear")]
    LogLinear,
    #[value(name = "nonlinear_refine")]
    NonlinearRefine,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::LogLinear => FitMethod::LogLinear,
            MethodArg::NonlinearRefine => FitMethod::NonlinearRefine,
        }
    }
}

pub fn target_label(t: TargetArg) -> &'static str {
    match t {
        TargetArg::Incidence => "incidence",
        TargetArg::Cumulative => "cumulative",
    }
}

pub fn method_label(m: MethodArg) -> &'static str {
    match m {
        MethodArg::LogLinear => "log_linear",
        MethodArg::NonlinearRefine => "nonlinear_refine",
    }
}

/// Parses an optional JSON config file; absent path means all defaults.
pub fn load_config<T: Default + for<'de> Deserialize<'de>>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))
        }
    }
}

/// Rejects a config written for another subcommand. Sidecars record theirs,
/// so any emitted sidecar replays verbatim as a config file.
pub fn check_command(found: Option<&str>, expected: &str) -> Result<(), CliError> {
    match found {
        Some(c) if c != expected => Err(usage(format!(
            "config file names command `{c}`, but this is `{expected}`"
        ))),
        _ => Ok(()),
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitFileConfig {
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub kind: Option<InputKind>,
    pub date_column: Option<String>,
    pub count_column: Option<String>,
    pub generation_interval: Option<f64>,
    pub origin: Option<NaiveDate>,
    pub first_generation: Option<i64>,
    pub target: Option<TargetArg>,
    pub method: Option<MethodArg>,
    pub horizon: Option<u32>,
    pub rolling: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub format: Option<TableFormat>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarrFileConfig {
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub kind: Option<InputKind>,
    pub date_column: Option<String>,
    pub count_column: Option<String>,
    pub generation_interval: Option<f64>,
    pub origin: Option<NaiveDate>,
    pub first_generation: Option<i64>,
    pub confidence_level: Option<f64>,
    pub threshold: Option<f64>,
    pub min_run: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub format: Option<TableFormat>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFileConfig {
    pub command: Option<String>,
    pub r0: Option<f64>,
    pub rho: Option<f64>,
    pub population: Option<f64>,
    pub i0: Option<f64>,
    pub generations: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub format: Option<TableFormat>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFileConfig {
    pub command: Option<String>,
    pub r0_grid: Option<Vec<f64>>,
    pub r0_min: Option<f64>,
    pub r0_max: Option<f64>,
    pub r0_steps: Option<usize>,
    pub rho_grid: Option<Vec<f64>>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_steps: Option<usize>,
    pub population: Option<f64>,
    pub i0: Option<f64>,
    pub generations: Option<u32>,
    pub sequential: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub format: Option<TableFormat>,
}

/// Fully resolved input parameters; serialized into the config sidecar.
#[derive(Serialize)]
pub struct ResolvedInput {
    pub input: PathBuf,
    pub kind: InputKind,
    pub date_column: String,
    pub count_column: String,
    pub generation_interval: f64,
    pub origin: Option<NaiveDate>,
    pub first_generation: Option<i64>,
}

/// Reads the input per the resolved spec and returns a generation series.
///
/// Date-based layouts are aggregated onto the generation grid anchored at
/// `origin` and reindexed so the first generation is 1 unless
/// `first_generation` overrides that; generation layouts keep their own
/// indices unless `first_generation` is given.
pub fn load_series(spec: &ResolvedInput) -> Result<GenerationSeries, CliError> {
    let file = File::open(&spec.input)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", spec.input.display())))?;
    let series = match spec.kind {
        InputKind::Generations => GenerationSeries::from_csv(file, spec.generation_interval)?,
        InputKind::Cumulative | InputKind::Incident => {
            let origin = spec.origin.expect("origin checked during resolution");
            let schema = CsvSchema {
                date_column: spec.date_column.clone(),
                count_column: spec.count_column.clone(),
            };
            let raw = if spec.kind == InputKind::Cumulative {
                let cumulative = ingest_csv(file, &schema, SeriesKind::Cumulative)?;
                cumulative_to_pseudo_incidence(&cumulative)?
            } else {
                ingest_csv(file, &schema, SeriesKind::Incident)?
            };
            aggregate_to_generations(&raw, spec.generation_interval, origin)?
        }
    };
    Ok(match spec.first_generation {
        Some(n) => series.reindex(n),
        None if spec.kind != InputKind::Generations => series.reindex(1),
        None => series,
    })
}
