//! Command-line front end for the trajectory models: IDEA fitting, Farr's
//! K analysis, damped SIR simulation, and (r0, rho) divergence sweeps.
//!
//! Every run writes a `{prefix}_config.json` sidecar holding the resolved
//! parameters, and identical inputs produce byte-identical artifacts.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process;

use chrono::{Duration, NaiveDate};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use farrlaw::farr::{compute_k_series, detect_waves, k_series_to_csv, k_to_d, pool_k, PoolMethod};
use farrlaw::format::fmt_sig;
use farrlaw::idea::fit_idea;
use farrlaw::sir::{
    map_rho_to_k, map_sir_to_idea, mapped_idea_curve, simulate_damped_sir, sweep_parameter_space,
    SirParams, SweepConfig,
};
use farrlaw::timeseries::GenerationSeries;

use config::{
    check_command, load_config, load_series, method_label, target_label, usage, CliError,
    FarrFileConfig, FitFileConfig, InputKind, MethodArg, ResolvedInput, SimulateFileConfig,
    SweepFileConfig, TableFormat, TargetArg,
};
use report::{write_bytes, write_json, write_table_artifact, Cell};

#[derive(Parser)]
#[command(
    name = "farrlaw",
    version,
    about = "Epidemic trajectory models: IDEA fitting, Farr's K, damped SIR"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the incidence-decay model to a case series
    Fit(FitArgs),
    /// Tetrad K ratios with confidence intervals, pooling, and wave alarms
    Farr(FarrArgs),
    /// Run the damped SIR model and its equivalent IDEA overlay
    Simulate(SimulateArgs),
    /// Map SIR-IDEA divergence over an (r0, rho) grid
    Sweep(SweepArgs),
}

#[derive(clap::Args)]
struct InputArgs {
    /// Input CSV path
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input layout (default: generations)
    #[arg(long, value_enum)]
    kind: Option<InputKind>,
    /// Date column name for date-based layouts (default: date)
    #[arg(long)]
    date_column: Option<String>,
    /// Count column name for date-based layouts (default: count)
    #[arg(long)]
    count_column: Option<String>,
    /// Generation interval in days (required for date-based layouts)
    #[arg(long)]
    generation_interval: Option<f64>,
    /// Calendar date of generation zero, YYYY-MM-DD (required for
    /// date-based layouts)
    #[arg(long)]
    origin: Option<NaiveDate>,
    /// Reindex the series so its first generation gets this index
    #[arg(long)]
    first_generation: Option<i64>,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// JSON config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for artifacts (default: current directory)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Artifact filename prefix (default: the command name)
    #[arg(long)]
    prefix: Option<String>,
    /// Table artifact format (default: csv)
    #[arg(long, value_enum)]
    format: Option<TableFormat>,
}

#[derive(clap::Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fit objective scale (default: incidence)
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Estimator (default: nonlinear_refine)
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Project this many generations past the end of the series
    #[arg(long)]
    horizon: Option<u32>,
    /// Refit on each successive prefix, emitting a d-vs-time table
    #[arg(long)]
    rolling: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct FarrArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Confidence level for K intervals (default: 0.95)
    #[arg(long)]
    confidence_level: Option<f64>,
    /// K threshold for wave alarms (default: 1)
    #[arg(long)]
    threshold: Option<f64>,
    /// Consecutive above-threshold tetrads required for an alarm
    /// (default: 2)
    #[arg(long)]
    min_run: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Basic reproduction number of the damped SIR model
    #[arg(long)]
    r0: Option<f64>,
    /// Per-generation dampening factor in (0, 1]
    #[arg(long)]
    rho: Option<f64>,
    /// Population size (default: 1e8)
    #[arg(long)]
    population: Option<f64>,
    /// Initial incidence (default: 1)
    #[arg(long)]
    i0: Option<f64>,
    /// Number of generations to simulate (default: 15)
    #[arg(long)]
    generations: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Smallest r0 in the grid
    #[arg(long)]
    r0_min: Option<f64>,
    /// Largest r0 in the grid
    #[arg(long)]
    r0_max: Option<f64>,
    /// Number of r0 grid points
    #[arg(long)]
    r0_steps: Option<usize>,
    /// Smallest rho in the grid
    #[arg(long)]
    rho_min: Option<f64>,
    /// Largest rho in the grid
    #[arg(long)]
    rho_max: Option<f64>,
    /// Number of rho grid points
    #[arg(long)]
    rho_steps: Option<usize>,
    /// Population size (default: 1e8)
    #[arg(long)]
    population: Option<f64>,
    /// Initial incidence (default: 1)
    #[arg(long)]
    i0: Option<f64>,
    /// Generations per cell (default: 15)
    #[arg(long)]
    generations: Option<u32>,
    /// Evaluate cells on one thread instead of in parallel
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Fit(args) => run_fit(args),
        Command::Farr(args) => run_farr(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Sweep(args) => run_sweep(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_input(
    args: InputArgs,
    input: Option<PathBuf>,
    kind: Option<InputKind>,
    date_column: Option<String>,
    count_column: Option<String>,
    generation_interval: Option<f64>,
    origin: Option<NaiveDate>,
    first_generation: Option<i64>,
) -> Result<ResolvedInput, CliError> {
    let input = args
        .input
        .or(input)
        .ok_or_else(|| usage("--input is required"))?;
    let kind = args.kind.or(kind).unwrap_or(InputKind::Generations);
    let date_column = args
        .date_column
        .or(date_column)
        .unwrap_or_else(|| "date".to_string());
    let count_column = args
        .count_column
        .or(count_column)
        .unwrap_or_else(|| "count".to_string());
    let origin = args.origin.or(origin);
    let first_generation = args.first_generation.or(first_generation);
    let generation_interval = match args.generation_interval.or(generation_interval) {
        Some(g) => g,
        None if kind == InputKind::Generations => 1.0,
        None => return Err(usage("--generation-interval is required for date-based input")),
    };
    if !(generation_interval.is_finite() && generation_interval > 0.0) {
        return Err(usage("generation interval must be positive and finite"));
    }
    if kind != InputKind::Generations && origin.is_none() {
        return Err(usage("--origin is required for date-based input"));
    }
    Ok(ResolvedInput {
        input,
        kind,
        date_column,
        count_column,
        generation_interval,
        origin,
        first_generation,
    })
}

fn resolve_output(
    args: &OutputArgs,
    out_dir: Option<PathBuf>,
    prefix: Option<String>,
    format: Option<TableFormat>,
    default_prefix: &str,
) -> (PathBuf, String, TableFormat) {
    (
        args.out_dir
            .clone()
            .or(out_dir)
            .unwrap_or_else(|| PathBuf::from(".")),
        args.prefix
            .clone()
            .or(prefix)
            .unwrap_or_else(|| default_prefix.to_string()),
        args.format.or(format).unwrap_or(TableFormat::Csv),
    )
}

fn prepare_out_dir(out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))
}

fn note(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct FitSidecar<'a> {
    command: &'static str,
    #[serde(flatten)]
    input: &'a ResolvedInput,
    target: TargetArg,
    method: MethodArg,
    horizon: Option<u32>,
    rolling: bool,
    out_dir: &'a Path,
    prefix: &'a str,
    format: TableFormat,
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let file: FitFileConfig = load_config(args.output.config.as_deref())?;
    check_command(file.command.as_deref(), "fit")?;
    let input = resolve_input(
        args.input,
        file.input,
        file.kind,
        file.date_column,
        file.count_column,
        file.generation_interval,
        file.origin,
        file.first_generation,
    )?;
    let (out_dir, prefix, format) =
        resolve_output(&args.output, file.out_dir, file.prefix, file.format, "fit");
    let target = args.target.or(file.target).unwrap_or(TargetArg::Incidence);
    let method = args
        .method
        .or(file.method)
        .unwrap_or(MethodArg::NonlinearRefine);
    let horizon = args.horizon.or(file.horizon).filter(|&h| h > 0);
    let rolling = args.rolling || file.rolling.unwrap_or(false);

    prepare_out_dir(&out_dir)?;
    let sidecar_path = out_dir.join(format!("{prefix}_config.json"));
    write_json(
        &sidecar_path,
        &FitSidecar {
            command: "fit",
            input: &input,
            target,
            method,
            horizon,
            rolling,
            out_dir: &out_dir,
            prefix: &prefix,
            format,
        },
    )?;
    note(&sidecar_path);

    let series = load_series(&input)?;
    let fit = fit_idea(&series, target.into(), method.into())?;
    let params = fit.params;

    let params_path = out_dir.join(format!("{prefix}_params.json"));
    write_json(&params_path, &fit.to_json())?;
    note(&params_path);

    let curve_rows: Vec<Vec<Cell>> = series
        .generations()
        .map(|(g, observed)| {
            let fitted = match u32::try_from(g) {
                Ok(t) if t >= 1 => Cell::Num(params.incidence(t).expect("t >= 1")),
                _ => Cell::Empty,
            };
            vec![Cell::Int(g), Cell::Num(observed), fitted]
        })
        .collect();
    let curve_path = write_table_artifact(
        &out_dir,
        &prefix,
        "curve",
        format,
        &["generation", "observed", "fitted"],
        &curve_rows,
    )?;
    note(&curve_path);

    if let Some(h) = horizon {
        let last = series.generation(series.len() - 1);
        let from_t = u32::try_from(last.max(0))
            .map_err(|_| usage("series ends too far out to project from"))?;
        let projection = params.project(from_t, h)?;
        let rows: Vec<Vec<Cell>> = projection
            .generations()
            .map(|(g, v)| vec![Cell::Int(g), Cell::Num(v)])
            .collect();
        let path = write_table_artifact(
            &out_dir,
            &prefix,
            "projection",
            format,
            &["generation", "fitted"],
            &rows,
        )?;
        note(&path);
    }

    if rolling {
        let values = series.values();
        let mut rows = Vec::new();
        for end in 3..=values.len() {
            let Ok(prefix_series) = GenerationSeries::new(
                series.i0_generation(),
                series.interval_days(),
                values[..end].to_vec(),
            ) else {
                continue;
            };
            let Ok(f) = fit_idea(&prefix_series, target.into(), method.into()) else {
                continue;
            };
            rows.push(vec![
                Cell::Int(series.generation(end - 1)),
                Cell::Num(f.params.r0()),
                Cell::Num(f.params.d()),
                Cell::Num(f.sse),
            ]);
        }
        let path = write_table_artifact(
            &out_dir,
            &prefix,
            "rolling",
            format,
            &["generation", "r0", "d", "sse"],
            &rows,
        )?;
        note(&path);
    }

    println!(
        "fitted r0={} d={} (method={}, target={}, sse={}, n_used={})",
        fmt_sig(params.r0(), 12),
        fmt_sig(params.d(), 12),
        method_label(method),
        target_label(target),
        fmt_sig(fit.sse, 12),
        fit.n_used
    );
    if !fit.excluded_generations.is_empty() {
        println!("excluded generations: {:?}", fit.excluded_generations);
    }
    println!(
        "generation interval: {} day(s)",
        fmt_sig(series.interval_days(), 12)
    );
    Ok(())
}

#[derive(Serialize)]
struct FarrSidecar<'a> {
    command: &'static str,
    #[serde(flatten)]
    input: &'a ResolvedInput,
    confidence_level: f64,
    threshold: f64,
    min_run: usize,
    out_dir: &'a Path,
    prefix: &'a str,
    format: TableFormat,
}

fn run_farr(args: FarrArgs) -> Result<(), CliError> {
    let file: FarrFileConfig = load_config(args.output.config.as_deref())?;
    check_command(file.command.as_deref(), "farr")?;
    let input = resolve_input(
        args.input,
        file.input,
        file.kind,
        file.date_column,
        file.count_column,
        file.generation_interval,
        file.origin,
        file.first_generation,
    )?;
    let (out_dir, prefix, format) =
        resolve_output(&args.output, file.out_dir, file.prefix, file.format, "farr");
    let confidence_level = args
        .confidence_level
        .or(file.confidence_level)
        .unwrap_or(0.95);
    if !(confidence_level > 0.0 && confidence_level < 1.0) {
        return Err(usage("confidence level must lie strictly between 0 and 1"));
    }
    let threshold = args.threshold.or(file.threshold).unwrap_or(1.0);
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(usage("threshold must be positive and finite"));
    }
    let min_run = args.min_run.or(file.min_run).unwrap_or(2);

    prepare_out_dir(&out_dir)?;
    let sidecar_path = out_dir.join(format!("{prefix}_config.json"));
    write_json(
        &sidecar_path,
        &FarrSidecar {
            command: "farr",
            input: &input,
            confidence_level,
            threshold,
            min_run,
            out_dir: &out_dir,
            prefix: &prefix,
            format,
        },
    )?;
    note(&sidecar_path);

    let series = load_series(&input)?;
    let estimates = compute_k_series(&series, confidence_level)?;

    let k_path = match format {
        TableFormat::Csv => {
            let path = out_dir.join(format!("{prefix}_k.csv"));
            let mut buf = Vec::new();
            k_series_to_csv(&estimates, &mut buf)?;
            write_bytes(&path, &buf)?;
            path
        }
        TableFormat::Json => {
            let rows: Vec<Vec<Cell>> = estimates
                .iter()
                .map(|e| {
                    vec![
                        Cell::Int(e.t_start),
                        e.k.map_or(Cell::Empty, Cell::Num),
                        e.log_k_variance.map_or(Cell::Empty, Cell::Num),
                        e.ci_low.map_or(Cell::Empty, Cell::Num),
                        e.ci_high.map_or(Cell::Empty, Cell::Num),
                        Cell::Bool(e.is_valid()),
                    ]
                })
                .collect();
            let path = out_dir.join(format!("{prefix}_k.json"));
            write_json(
                &path,
                &report::table_json(
                    &["t_start", "k", "log_k_variance", "ci_low", "ci_high", "valid"],
                    &rows,
                ),
            )?;
            path
        }
    };
    note(&k_path);

    let kd_rows: Vec<Vec<Cell>> = estimates
        .iter()
        .map(|e| {
            let (k_cell, d_cell) = match e.k {
                Some(k) => (Cell::Num(k), k_to_d(k).map_or(Cell::Empty, Cell::Num)),
                None => (Cell::Empty, Cell::Empty),
            };
            vec![Cell::Int(e.t_start), k_cell, d_cell]
        })
        .collect();
    let kd_path = write_table_artifact(
        &out_dir,
        &prefix,
        "kd",
        format,
        &["t_start", "k", "d"],
        &kd_rows,
    )?;
    note(&kd_path);

    let pooled_entry = |method: PoolMethod| match pool_k(&estimates, method) {
        Ok(p) => serde_json::to_value(p).expect("pooled value serializes"),
        Err(_) => serde_json::Value::Null,
    };
    let pooled_path = out_dir.join(format!("{prefix}_pooled.json"));
    write_json(
        &pooled_path,
        &json!({
            "geometric_mean": pooled_entry(PoolMethod::GeometricMean),
            "inverse_variance": pooled_entry(PoolMethod::InverseVariance),
        }),
    )?;
    note(&pooled_path);

    let alarms = detect_waves(&estimates, threshold, min_run);
    let alarm_values: Vec<serde_json::Value> = alarms
        .iter()
        .map(|a| {
            let date = input.origin.map(|o| {
                let days = (a.t_start as f64 * input.generation_interval).floor() as i64;
                (o + Duration::days(days)).to_string()
            });
            json!({"t_start": a.t_start, "k": a.k, "date": date})
        })
        .collect();
    let alarms_path = out_dir.join(format!("{prefix}_alarms.json"));
    write_json(
        &alarms_path,
        &json!({"threshold": threshold, "min_run": min_run, "alarms": alarm_values}),
    )?;
    note(&alarms_path);

    let valid = estimates.iter().filter(|e| e.is_valid()).count();
    println!("tetrads: {valid} valid of {}", estimates.len());
    match pool_k(&estimates, PoolMethod::GeometricMean) {
        Ok(p) => println!(
            "pooled K (geometric) = {} (d = {})",
            fmt_sig(p.k_pooled, 12),
            fmt_sig(p.d_equivalent, 12)
        ),
        Err(_) => println!("pooled K unavailable: no valid tetrads"),
    }
    println!("wave alarms: {}", alarms.len());
    println!(
        "generation interval: {} day(s)",
        fmt_sig(series.interval_days(), 12)
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateSidecar<'a> {
    command: &'static str,
    r0: f64,
    rho: f64,
    population: f64,
    i0: f64,
    generations: u32,
    out_dir: &'a Path,
    prefix: &'a str,
    format: TableFormat,
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file: SimulateFileConfig = load_config(args.output.config.as_deref())?;
    check_command(file.command.as_deref(), "simulate")?;
    let r0 = args
        .r0
        .or(file.r0)
        .ok_or_else(|| usage("--r0 is required"))?;
    let rho = args
        .rho
        .or(file.rho)
        .ok_or_else(|| usage("--rho is required"))?;
    let population = args.population.or(file.population).unwrap_or(1e8);
    let i0 = args.i0.or(file.i0).unwrap_or(1.0);
    let generations = args.generations.or(file.generations).unwrap_or(15);
    if generations == 0 {
        return Err(usage("--generations must be at least 1"));
    }
    let (out_dir, prefix, format) = resolve_output(
        &args.output,
        file.out_dir,
        file.prefix,
        file.format,
        "simulate",
    );
    let params = SirParams::new(r0, rho, population, i0).map_err(|e| usage(e.to_string()))?;

    prepare_out_dir(&out_dir)?;
    let sidecar_path = out_dir.join(format!("{prefix}_config.json"));
    write_json(
        &sidecar_path,
        &SimulateSidecar {
            command: "simulate",
            r0,
            rho,
            population,
            i0,
            generations,
            out_dir: &out_dir,
            prefix: &prefix,
            format,
        },
    )?;
    note(&sidecar_path);

    let trajectory = simulate_damped_sir(&params, generations);
    let idea = map_sir_to_idea(&params).map_err(|e| usage(e.to_string()))?;
    let overlay_curve = mapped_idea_curve(&params, generations).map_err(|e| usage(e.to_string()))?;
    let k = map_rho_to_k(rho).map_err(|e| usage(e.to_string()))?;

    let trajectory_rows: Vec<Vec<Cell>> = (0..=generations as usize)
        .map(|t| {
            vec![
                Cell::Int(t as i64),
                Cell::Num(trajectory.incidence()[t]),
                Cell::Num(trajectory.susceptibles()[t]),
                Cell::Num(trajectory.effective_r()[t]),
            ]
        })
        .collect();
    let trajectory_path = write_table_artifact(
        &out_dir,
        &prefix,
        "trajectory",
        format,
        &["generation", "incidence", "susceptibles", "effective_r"],
        &trajectory_rows,
    )?;
    note(&trajectory_path);

    let overlay_rows: Vec<Vec<Cell>> = (1..=generations as usize)
        .map(|t| {
            vec![
                Cell::Int(t as i64),
                Cell::Num(trajectory.incidence()[t]),
                Cell::Num(overlay_curve[t - 1]),
            ]
        })
        .collect();
    let overlay_path = write_table_artifact(
        &out_dir,
        &prefix,
        "overlay",
        format,
        &["generation", "sir_incidence", "idea_incidence"],
        &overlay_rows,
    )?;
    note(&overlay_path);

    let summary_path = out_dir.join(format!("{prefix}_summary.json"));
    write_json(
        &summary_path,
        &json!({
            "r0_sir": r0,
            "rho": rho,
            "population": population,
            "i0": i0,
            "n_generations": generations,
            "attack_fraction": trajectory.attack_fraction(),
            "depleted_at": trajectory.depleted_at(),
            "r0_idea": idea.r0(),
            "d": idea.d(),
            "k": k,
        }),
    )?;
    note(&summary_path);

    println!(
        "attack fraction = {}",
        fmt_sig(trajectory.attack_fraction(), 12)
    );
    match trajectory.depleted_at() {
        Some(t) => println!("susceptibles depleted at generation {t}"),
        None => println!("susceptibles never depleted"),
    }
    println!(
        "equivalent IDEA: r0={} d={} (K={})",
        fmt_sig(idea.r0(), 12),
        fmt_sig(idea.d(), 12),
        fmt_sig(k, 12)
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    command: &'static str,
    r0_grid: &'a [f64],
    rho_grid: &'a [f64],
    population: f64,
    i0: f64,
    generations: u32,
    sequential: bool,
    out_dir: &'a Path,
    prefix: &'a str,
    format: TableFormat,
}

#[allow(clippy::too_many_arguments)]
fn resolve_grid(
    name: &str,
    flag_min: Option<f64>,
    flag_max: Option<f64>,
    flag_steps: Option<usize>,
    file_grid: Option<Vec<f64>>,
    file_min: Option<f64>,
    file_max: Option<f64>,
    file_steps: Option<usize>,
) -> Result<Vec<f64>, CliError> {
    let range = if flag_min.is_some() || flag_max.is_some() || flag_steps.is_some() {
        match (
            flag_min.or(file_min),
            flag_max.or(file_max),
            flag_steps.or(file_steps),
        ) {
            (Some(lo), Some(hi), Some(n)) => (lo, hi, n),
            _ => {
                return Err(usage(format!(
                    "--{name}-min, --{name}-max, and --{name}-steps must resolve together"
                )))
            }
        }
    } else if let Some(grid) = file_grid {
        if grid.is_empty() {
            return Err(usage(format!("{name}_grid must not be empty")));
        }
        return Ok(grid);
    } else if file_min.is_some() || file_max.is_some() || file_steps.is_some() {
        match (file_min, file_max, file_steps) {
            (Some(lo), Some(hi), Some(n)) => (lo, hi, n),
            _ => {
                return Err(usage(format!(
                    "{name}_min, {name}_max, and {name}_steps must appear together"
                )))
            }
        }
    } else {
        return Err(usage(format!(
            "no {name} grid: give --{name}-min/--{name}-max/--{name}-steps or {name}_grid in the config"
        )));
    };
    linspace(name, range.0, range.1, range.2)
}

fn linspace(name: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(usage(format!(
            "{name} range must be finite with at least one step"
        )));
    }
    if n == 1 {
        if lo != hi {
            return Err(usage(format!("{name}: a single step needs min = max")));
        }
        return Ok(vec![lo]);
    }
    if hi < lo {
        return Err(usage(format!("{name}: max must be at least min")));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file: SweepFileConfig = load_config(args.output.config.as_deref())?;
    check_command(file.command.as_deref(), "sweep")?;
    let r0_grid = resolve_grid(
        "r0",
        args.r0_min,
        args.r0_max,
        args.r0_steps,
        file.r0_grid,
        file.r0_min,
        file.r0_max,
        file.r0_steps,
    )?;
    let rho_grid = resolve_grid(
        "rho",
        args.rho_min,
        args.rho_max,
        args.rho_steps,
        file.rho_grid,
        file.rho_min,
        file.rho_max,
        file.rho_steps,
    )?;
    let population = args.population.or(file.population).unwrap_or(1e8);
    let i0 = args.i0.or(file.i0).unwrap_or(1.0);
    let generations = args.generations.or(file.generations).unwrap_or(15);
    if generations == 0 {
        return Err(usage("--generations must be at least 1"));
    }
    let sequential = args.sequential || file.sequential.unwrap_or(false);
    let (out_dir, prefix, format) = resolve_output(
        &args.output,
        file.out_dir,
        file.prefix,
        file.format,
        "sweep",
    );

    prepare_out_dir(&out_dir)?;
    let sidecar_path = out_dir.join(format!("{prefix}_config.json"));
    write_json(
        &sidecar_path,
        &SweepSidecar {
            command: "sweep",
            r0_grid: &r0_grid,
            rho_grid: &rho_grid,
            population,
            i0,
            generations,
            sequential,
            out_dir: &out_dir,
            prefix: &prefix,
            format,
        },
    )?;
    note(&sidecar_path);

    let mut sweep_config = SweepConfig::new(r0_grid, rho_grid, generations);
    sweep_config.population = population;
    sweep_config.i0 = i0;
    sweep_config.parallel = !sequential;
    let result = sweep_parameter_space(&sweep_config).map_err(|e| usage(e.to_string()))?;

    let sweep_path = match format {
        TableFormat::Csv => {
            let path = out_dir.join(format!("{prefix}_sweep.csv"));
            let mut buf = Vec::new();
            result.to_long_csv(&mut buf)?;
            write_bytes(&path, &buf)?;
            path
        }
        TableFormat::Json => {
            let path = out_dir.join(format!("{prefix}_sweep.json"));
            write_json(&path, &result.to_json())?;
            path
        }
    };
    note(&sweep_path);

    let max_normalized = result
        .delta_normalized
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
    println!(
        "grid {}x{} ({} cells); max normalized delta = {}",
        result.r0_grid.len(),
        result.rho_grid.len(),
        result.r0_grid.len() * result.rho_grid.len(),
        fmt_sig(max_normalized, 12)
    );
    Ok(())
}
