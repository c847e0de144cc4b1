//! `tsbench` — generate chaotic-ODE benchmark datasets, measure
//! cross-channel dependence with Granger causality, tune channel-independent
//! and channel-dependent linear forecasters over lookback windows, and
//! aggregate the results into summary reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tsbench_core::forecast::{ChannelMode, Family, FittedForecaster};
use tsbench_core::granger::{granger_analyze, GrangerConfig};
use tsbench_core::ode::{generate_benchmark, IntegratorConfig};
use tsbench_core::report::{Grouping, SummaryReport};
use tsbench_core::series::{
    apply_normalizer, fit_normalizer, load_csv, split_at, split_series, Direction, SplitSpec,
    TimeSeries,
};
use tsbench_core::tune::{run_search, SearchSpace, TuneReport, TunerSettings};
use tsbench_core::window::make_windows;

#[derive(Parser)]
#[command(
    name = "tsbench",
    version,
    about = "Channel-dependence benchmarking for multivariate time-series forecasting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the six-dataset chaotic-ODE benchmark plus a manifest.
    Generate(GenerateArgs),
    /// Run pairwise Granger causality analysis on a dataset.
    Granger(GrangerArgs),
    /// Random-search forecaster hyperparameters (lookback included).
    Tune(TuneArgs),
    /// Evaluate a saved forecaster on a dataset's test split.
    Evaluate(EvaluateArgs),
    /// Aggregate tune reports into a summary report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for the CSVs and manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3001)]
    seed: u64,
    /// Recorded steps per dataset.
    #[arg(long, default_value_t = 60_000)]
    steps: usize,
    /// Integration step (time units); 0.05 records 20 points per time unit.
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// Steps discarded before recording starts.
    #[arg(long, default_value_t = 1000)]
    transient: usize,
}

#[derive(Args)]
struct GrangerArgs {
    /// Input CSV (header row; first column is a timestamp unless
    /// --no-time-column).
    #[arg(long)]
    data: PathBuf,
    /// Lag order of the underlying autoregressions.
    #[arg(long)]
    lag: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Steps analyzed from the start of the series.
    #[arg(long = "sample-len", default_value_t = 1000)]
    sample_len: usize,
    #[arg(long = "pearson-threshold", default_value_t = 0.95)]
    pearson_threshold: f64,
    /// Maximum differencing passes when stationarizing.
    #[arg(long = "max-diff", default_value_t = 2)]
    max_diff: usize,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json (full report) or csv (pair table).
    #[arg(long, default_value = "json")]
    format: String,
    /// Treat the first CSV column as data rather than timestamps.
    #[arg(long = "no-time-column")]
    no_time_column: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    horizon: usize,
    /// Number of search trials.
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = 3001)]
    seed: u64,
    /// Search-space file (key = value lines mirroring the space fields).
    #[arg(long)]
    space: Option<PathBuf>,
    /// Tune report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to save the selected fitted model.
    #[arg(long = "model-out")]
    model_out: Option<PathBuf>,
    /// Model label recorded in the report (defaults to family-mode).
    #[arg(long)]
    label: Option<String>,
    /// Chronological split ratios.
    #[arg(long, default_value = "0.7,0.1,0.2")]
    split: String,
    /// Explicit split boundaries `train_end,val_end` (overrides --split).
    #[arg(long = "split-at")]
    split_at: Option<String>,
    /// Dataset id recorded in the report (defaults to the file stem).
    #[arg(long = "dataset-name")]
    dataset_name: Option<String>,
    #[arg(long = "no-time-column")]
    no_time_column: bool,
    /// Record wall-clock fit times in the report (non-reproducible bytes).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Saved model file from `tune --model-out`.
    #[arg(long)]
    model: PathBuf,
    /// Forecast horizon; must match the saved model.
    #[arg(long)]
    horizon: usize,
    #[arg(long, default_value = "0.7,0.1,0.2")]
    split: String,
    #[arg(long = "no-time-column")]
    no_time_column: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of tune-report JSON files.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file (json) or directory (csv).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json")]
    format: String,
    /// Histogram grouping: model or dataset.
    #[arg(long = "group-by", default_value = "model")]
    group_by: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Granger(args) => cmd_granger(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

type CmdResult = Result<(), String>;

fn stringify<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let cfg = IntegratorConfig {
        dt: args.dt,
        steps: args.steps,
        seed: args.seed,
        transient_steps: args.transient,
    };
    let manifest = generate_benchmark(&args.out, &cfg).map_err(stringify)?;
    for entry in &manifest {
        println!(
            "wrote {} ({} channels x {} steps)",
            entry.name, entry.dim, entry.steps
        );
    }
    println!("manifest: {}", args.out.join("manifest.json").display());
    Ok(())
}

fn cmd_granger(args: GrangerArgs) -> CmdResult {
    let series = load_csv(&args.data, !args.no_time_column).map_err(stringify)?;
    let cfg = GrangerConfig {
        lag: args.lag,
        alpha: args.alpha,
        pearson_threshold: args.pearson_threshold,
        sample_len: args.sample_len,
        max_diff: args.max_diff,
    };
    let report = granger_analyze(&series, &cfg).map_err(stringify)?;
    let payload = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report).map_err(stringify)?,
        "csv" => report.pairs_to_csv(),
        other => return Err(format!("unsupported format `{other}` (use json or csv)")),
    };
    emit(&payload, args.out.as_deref())
}

fn parse_split(spec: &str) -> Result<SplitSpec, String> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad --split `{spec}`: {e}"))?;
    if parts.len() != 3 {
        return Err(format!("--split needs three ratios, got `{spec}`"));
    }
    SplitSpec::new(parts[0], parts[1], parts[2]).map_err(stringify)
}

fn split_input(
    series: &TimeSeries,
    split: &str,
    boundaries: Option<&str>,
) -> Result<(TimeSeries, TimeSeries, TimeSeries), String> {
    match boundaries {
        Some(spec) => {
            let parts: Vec<usize> = spec
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("bad --split-at `{spec}`: {e}"))?;
            if parts.len() != 2 {
                return Err(format!("--split-at needs two indices, got `{spec}`"));
            }
            split_at(series, parts[0], parts[1]).map_err(stringify)
        }
        None => split_series(series, &parse_split(split)?).map_err(stringify),
    }
}

fn parse_space_file(path: &Path) -> Result<SearchSpace, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read space file {}: {e}", path.display()))?;
    let mut space = SearchSpace::default();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("space file line {}: expected key = value", line_no + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let items: Vec<&str> = value.split(',').map(str::trim).collect();
        let bad = |what: &str| format!("space file line {}: bad {what} `{value}`", line_no + 1);
        match key {
            "lookbacks" => {
                space.lookbacks = items
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("lookbacks"))?;
            }
            "lambda_min" => {
                space.lambda_range.0 = value.parse().map_err(|_| bad("lambda_min"))?;
            }
            "lambda_max" => {
                space.lambda_range.1 = value.parse().map_err(|_| bad("lambda_max"))?;
            }
            "kernels" => {
                space.kernels = items
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("kernels"))?;
            }
            "families" => {
                space.families = items
                    .iter()
                    .map(|s| Family::from_name(s).ok_or(()))
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("families"))?;
            }
            "modes" => {
                space.modes = items
                    .iter()
                    .map(|s| ChannelMode::from_name(s).ok_or(()))
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("modes"))?;
            }
            "revin" => {
                space.revin_options = items
                    .iter()
                    .map(|s| match *s {
                        "on" | "true" => Ok(true),
                        "off" | "false" => Ok(false),
                        _ => Err(()),
                    })
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("revin"))?;
            }
            other => {
                return Err(format!(
                    "space file line {}: unknown key `{other}`",
                    line_no + 1
                ))
            }
        }
    }
    space.validate().map_err(stringify)?;
    Ok(space)
}

fn cmd_tune(args: TuneArgs) -> CmdResult {
    let series = load_csv(&args.data, !args.no_time_column).map_err(stringify)?;
    let dataset_name = args
        .dataset_name
        .clone()
        .unwrap_or_else(|| series.name.clone());
    let (train, val, test) = split_input(&series, &args.split, args.split_at.as_deref())?;
    let space = match &args.space {
        Some(path) => parse_space_file(path)?,
        None => SearchSpace::default(),
    };
    let settings = TunerSettings {
        record_timings: args.timings,
        ..Default::default()
    };
    let (report, model) = run_search(
        &dataset_name,
        &train,
        &val,
        &test,
        args.horizon,
        &space,
        args.budget,
        args.seed,
        &settings,
        args.label.as_deref(),
    )
    .map_err(stringify)?;
    if let Some(path) = &args.model_out {
        model.save(path).map_err(stringify)?;
    }
    let payload = report.to_json().map_err(stringify)?;
    emit(&payload, args.out.as_deref())
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    let series = load_csv(&args.data, !args.no_time_column).map_err(stringify)?;
    let model = FittedForecaster::load(&args.model).map_err(stringify)?;
    if model.spec.horizon != args.horizon {
        return Err(format!(
            "model was fitted for horizon {}, requested {}",
            model.spec.horizon, args.horizon
        ));
    }
    let (train, _, test) = split_input(&series, &args.split, None)?;
    let norm = fit_normalizer(&train).map_err(stringify)?;
    let test_n = apply_normalizer(&test, &norm, Direction::Forward).map_err(stringify)?;
    let windows =
        make_windows(&test_n, model.spec.lookback, model.spec.horizon, 1).map_err(stringify)?;
    if windows.is_empty() {
        return Err(format!(
            "test split of {} steps has no windows at lookback {} + horizon {}",
            test_n.len(),
            model.spec.lookback,
            model.spec.horizon
        ));
    }
    let mse = model.evaluate(&windows).map_err(stringify)?;
    println!("{mse}");
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CmdResult {
    let grouping = match args.group_by.as_str() {
        "model" => Grouping::ByModel,
        "dataset" => Grouping::ByDataset,
        other => {
            return Err(format!(
                "unsupported --group-by `{other}` (use model or dataset)"
            ))
        }
    };
    let mut entries: Vec<(PathBuf, TuneReport)> = Vec::new();
    let dir = std::fs::read_dir(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let mut paths: Vec<PathBuf> = dir
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        match TuneReport::from_json(&text) {
            Ok(report) => entries.push((path, report)),
            Err(_) => eprintln!("skipping {} (not a tune report)", path.display()),
        }
    }
    if entries.is_empty() {
        return Err(format!("no tune reports found in {}", args.input.display()));
    }
    let reports: Vec<TuneReport> = entries.into_iter().map(|(_, r)| r).collect();
    let summary = SummaryReport::from_tune_reports(&reports, grouping).map_err(stringify)?;
    match args.format.as_str() {
        "json" => summary.export_json(&args.out).map_err(stringify)?,
        "csv" => summary.export_csv(&args.out).map_err(stringify)?,
        other => return Err(format!("unsupported format `{other}` (use json or csv)")),
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn emit(payload: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}
