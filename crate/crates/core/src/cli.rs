//! Command-line front end: configuration parsing, experiment dispatch, and
//! CSV/JSON/plot-script emission.
//!
//! Every command is deterministic given its seed: data files are
//! byte-identical across reruns and across worker counts. Exit codes:
//! 0 success, 2 configuration/validation error, 3 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    interp_error_sweep, moment_sweep, rate_sweep, ExperimentConfig, SweepSource,
};
use crate::paths::DyadicPath;
use crate::randlaws::{HeavyTailLaw, PerturbedTailLaw, RngStream, SymmetricParetoLaw};
use crate::sobolev::{norm, SobolevParams};

#[derive(Parser)]
#[command(name = "stablewalk", version, about = "Heavy-tailed walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw increments from a heavy-tailed law.
    Sample(SampleArgs),
    /// Evaluate the fractional Sobolev norm of a path file.
    Norm(NormArgs),
    /// Projection-error exponent sweep.
    InterpError(SweepArgs),
    /// Normalized-sum moment boundedness sweep.
    MomentSweep(SweepArgs),
    /// Coupled walk/skeleton convergence-rate sweep.
    RateSweep(SweepArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Increment law: pareto or perturbed.
    #[arg(long)]
    law: String,
    #[arg(long)]
    alpha: f64,
    /// Leading tail amplitude (perturbed law).
    #[arg(long = "A", default_value_t = 1.0)]
    amplitude: f64,
    /// Perturbation amplitude (perturbed law).
    #[arg(long = "K", default_value_t = 0.0)]
    perturbation: f64,
    /// Perturbation decay exponent (perturbed law).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    count: u64,
    #[arg(long)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    /// CSV path file with header "t,value" and dyadic nodes.
    #[arg(long)]
    path_file: PathBuf,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    p: f64,
}

#[derive(Args, Default)]
struct SweepArgs {
    /// Flat key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON/plot files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; outputs are identical for every worker count.
    /// Defaults to $STABLEWALK_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "A")]
    amplitude: Option<f64>,
    #[arg(long = "K")]
    perturbation: Option<f64>,
    /// Comma-separated strictly increasing levels, e.g. 3,4,5.
    #[arg(long)]
    n_values: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n_ref_offset: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pool_size: Option<usize>,
}

/// Parse arguments from the process environment, run, and map the outcome
/// to an exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version by "erroring" with the text
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(args) => cmd_sample(&args),
        Command::Norm(args) => cmd_norm(&args),
        Command::InterpError(args) => cmd_interp_error(&args),
        Command::MomentSweep(args) => cmd_moment_sweep(&args),
        Command::RateSweep(args) => cmd_rate_sweep(&args),
    }
}

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let law = match args.law.as_str() {
        "pareto" => HeavyTailLaw::Pareto(SymmetricParetoLaw::new(args.alpha)?),
        "perturbed" => HeavyTailLaw::Perturbed(PerturbedTailLaw::new(
            args.alpha,
            args.amplitude,
            args.perturbation,
            args.gamma,
        )?),
        other => {
            return Err(Error::Config(format!(
                "unknown law '{other}': expected pareto or perturbed"
            )))
        }
    };
    let mut rng = RngStream::new(args.seed, 0).rng();
    let mut out = String::from("index,value\n");
    for i in 0..args.count {
        writeln!(out, "{i},{}", law.sample(&mut rng)).expect("string write");
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_norm(args: &NormArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.path_file)?;
    let path = parse_path_csv(&text)?;
    let params = SobolevParams::new(args.eta, args.p)?;
    println!("{:.11e}", norm(&path, &params)?);
    Ok(())
}

/// Parse a "t,value" CSV into a dyadic path, checking that the t column is
/// exactly the increasing dyadic grid k/2^level.
fn parse_path_csv(text: &str) -> Result<DyadicPath> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line == "t,value") {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("line {}: expected 't,value'", idx + 1)))?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("line {}: invalid number '{s}'", idx + 1)))
        };
        rows.push((parse(t)?, parse(v)?));
    }
    let count = rows.len();
    if count < 2 || !(count - 1).is_power_of_two() {
        return Err(Error::Config(format!(
            "path file must hold 2^level + 1 nodes, got {count}"
        )));
    }
    let level = (count - 1).trailing_zeros();
    let cells = (count - 1) as f64;
    for (k, &(t, _)) in rows.iter().enumerate() {
        if (t - k as f64 / cells).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "node {k}: t = {t} is not the dyadic point {}",
                k as f64 / cells
            )));
        }
    }
    DyadicPath::from_node_values(level, rows.into_iter().map(|(_, v)| v).collect())
}

/// Assemble the effective configuration: defaults, then the config file,
/// then explicit flags.
fn build_config(args: &SweepArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        apply_config_file(&mut cfg, &text)?;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.eta {
        cfg.eta = v;
    }
    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = args.amplitude {
        cfg.amplitude = v;
    }
    if let Some(v) = args.perturbation {
        cfg.perturbation = v;
    }
    if let Some(list) = &args.n_values {
        cfg.n_values = parse_n_values(list)?;
    }
    if let Some(v) = args.reps {
        cfg.reps = v;
    }
    if let Some(v) = args.n_ref_offset {
        cfg.n_ref_offset = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.pool_size {
        cfg.pool_size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_n_values(list: &str) -> Result<Vec<u32>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("invalid level '{s}' in n_values")))
        })
        .collect()
}

fn apply_config_file(cfg: &mut ExperimentConfig, text: &str) -> Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let real = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{key}': invalid number '{v}'")))
        };
        let integer = |v: &str| -> Result<u64> {
            v.parse::<u64>()
                .map_err(|_| Error::Config(format!("key '{key}': invalid integer '{v}'")))
        };
        match key {
            "alpha" => cfg.alpha = real(value)?,
            "eta" => cfg.eta = real(value)?,
            "p" => cfg.p = real(value)?,
            "gamma" => cfg.gamma = real(value)?,
            "A" => cfg.amplitude = real(value)?,
            "K" => cfg.perturbation = real(value)?,
            "n_values" => cfg.n_values = parse_n_values(value)?,
            "reps" => cfg.reps = integer(value)? as usize,
            "n_ref_offset" => cfg.n_ref_offset = integer(value)? as u32,
            "seed" => cfg.master_seed = integer(value)?,
            "pool_size" => cfg.pool_size = integer(value)? as usize,
            other => return Err(Error::Config(format!("unknown configuration key '{other}'"))),
        }
    }
    Ok(())
}

fn workers_of(args: &SweepArgs) -> usize {
    args.workers
        .or_else(|| std::env::var("STABLEWALK_WORKERS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a ExperimentConfig,
    tool_version: &'a str,
    timestamp: String,
    output_paths: Vec<String>,
}

/// Write the data CSV, summary JSON, plot script, and manifest for one
/// sweep. Only the manifest carries a timestamp; the data files are pure
/// functions of the configuration.
fn emit_outputs<S: Serialize>(
    out_dir: &Path,
    stem: &str,
    csv: &str,
    summary: &S,
    plot: &str,
    config: &ExperimentConfig,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let files = [
        (format!("{stem}.csv"), csv.to_string()),
        (
            format!("{stem}_summary.json"),
            serde_json::to_string_pretty(summary).map_err(|e| Error::Config(e.to_string()))?
                + "\n",
        ),
        (format!("{stem}.gp"), plot.to_string()),
    ];
    let mut output_paths = Vec::new();
    for (name, content) in &files {
        std::fs::write(out_dir.join(name), content)?;
        output_paths.push(name.clone());
    }
    let manifest_name = format!("{stem}_manifest.json");
    output_paths.push(manifest_name.clone());
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default();
    let manifest = RunManifest {
        config,
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp,
        output_paths,
    };
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(e.to_string()))?
        + "\n";
    std::fs::write(out_dir.join(manifest_name), body)?;
    Ok(())
}

fn plot_script(stem: &str, ylabel: &str, using: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key top right\n\
         set logscale y 2\n\
         set xlabel 'n'\n\
         set ylabel '{ylabel}'\n\
         plot '{stem}.csv' skip 1 using {using} with linespoints title '{stem}'\n"
    )
}

#[derive(Serialize)]
struct InterpSummary<'a> {
    config: &'a ExperimentConfig,
    n_ref: u32,
    slope: f64,
    intercept: f64,
    r_squared: f64,
    slope_std_error: f64,
    predicted_slope: f64,
    slope_within_band: bool,
}

fn cmd_interp_error(args: &SweepArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let sweep = interp_error_sweep(&cfg, SweepSource::Stable, workers_of(args))?;
    let mut csv = String::from("m,estimate,stderr\n");
    for &(m, e) in &sweep.rows {
        writeln!(csv, "{m},{},{}", e.mean, e.std_error).expect("string write");
    }
    let summary = InterpSummary {
        config: &cfg,
        n_ref: sweep.n_ref,
        slope: sweep.fit.slope,
        intercept: sweep.fit.intercept,
        r_squared: sweep.fit.r_squared,
        slope_std_error: sweep.fit.slope_std_error,
        predicted_slope: sweep.predicted_slope,
        slope_within_band: (sweep.fit.slope - sweep.predicted_slope).abs() <= 0.15,
    };
    let plot = plot_script("interp_error", "E || F - proj_m F ||^p", "1:2");
    emit_outputs(&args.out, "interp_error", &csv, &summary, &plot, &cfg)
}

#[derive(Serialize)]
struct MomentSummary<'a> {
    config: &'a ExperimentConfig,
    bounded_ratio: f64,
    bounded: bool,
}

fn cmd_moment_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let counts: Vec<u64> = cfg.n_values.iter().map(|&n| 1u64 << n).collect();
    let sweep = moment_sweep(
        &cfg.law()?,
        cfg.p,
        &counts,
        cfg.reps,
        cfg.master_seed,
        workers_of(args),
    )?;
    let mut csv = String::from("n,estimate,stderr\n");
    for &(n, e) in &sweep.rows {
        writeln!(csv, "{n},{},{}", e.mean, e.std_error).expect("string write");
    }
    let summary = MomentSummary {
        config: &cfg,
        bounded_ratio: sweep.bounded_ratio,
        bounded: sweep.bounded_ratio <= 1.25,
    };
    let plot = plot_script("moment_sweep", "E |N^{-1/alpha} sum Y|^p", "1:2");
    emit_outputs(&args.out, "moment_sweep", &csv, &summary, &plot, &cfg)
}

#[derive(Serialize)]
struct RateSummary<'a> {
    config: &'a ExperimentConfig,
    kappa: f64,
    upsilon: f64,
    slope: f64,
    intercept: f64,
    r_squared: f64,
    slope_std_error: f64,
    slope_ratio: f64,
    decay_at_least_predicted: bool,
    strictly_decreasing: bool,
}

fn cmd_rate_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let sweep = rate_sweep(&cfg, false, workers_of(args))?;
    let mut csv = String::from("n,m,distance_mean,distance_stderr,gap_walk,gap_stable\n");
    for row in &sweep.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.n,
            row.m,
            row.distance.mean,
            row.distance.std_error,
            row.gap_walk.mean,
            row.gap_stable.mean
        )
        .expect("string write");
    }
    let summary = RateSummary {
        config: &cfg,
        kappa: sweep.kappa,
        upsilon: sweep.upsilon,
        slope: sweep.fit.slope,
        intercept: sweep.fit.intercept,
        r_squared: sweep.fit.r_squared,
        slope_std_error: sweep.fit.slope_std_error,
        slope_ratio: sweep.slope_ratio,
        decay_at_least_predicted: sweep.fit.slope <= -0.8 * sweep.upsilon,
        strictly_decreasing: sweep
            .rows
            .windows(2)
            .all(|w| w[1].distance.mean < w[0].distance.mean),
    };
    let plot = plot_script("rate_sweep", "coupled distance", "1:3");
    emit_outputs(&args.out, "rate_sweep", &csv, &summary, &plot, &cfg)
}
