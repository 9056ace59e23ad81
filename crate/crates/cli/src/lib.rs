//! Command-line front end for `mc-elmap`.
//!
//! Three subcommands:
//!
//! * `reproduce` fits one map to the pooled input demonstrations and writes
//!   `reproduction.csv`, `weights.json`, `energies.json` and `metrics.json`.
//! * `benchmark` fits every method to every input dataset and writes a
//!   comparison `table.csv` plus per-dataset `boxplot_data.csv`.
//! * `synth` writes a synthetic demonstration set.
//!
//! Exit codes: 0 on success, 1 for usage, input or configuration errors,
//! 2 when the optimization problem is numerically degenerate.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mc_elmap::dataset::{demos_to_csv, demos_to_json, synth_demos_with, Format, Shape, SynthOptions};

pub mod benchmark;
pub mod manifest;
pub mod reproduce;
pub mod svg;

pub use manifest::{Method, RunManifest, ViaPoint};

/// An error together with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<mc_elmap::Error> for CliError {
    fn from(e: mc_elmap::Error) -> Self {
        let code = if matches!(e, mc_elmap::Error::Degenerate(_)) { 2 } else { 1 };
        Self { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mc-elmap", version, about = "Learn trajectories from demonstrations with multi-coordinate elastic maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a map to the pooled demonstrations and write its artifacts.
    Reproduce(RunArgs),
    /// Compare methods across datasets (one dataset per input file).
    Benchmark(RunArgs),
    /// Write a synthetic demonstration set.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Demonstration file; repeat for several files.
    #[arg(long = "input", short = 'i', value_name = "PATH")]
    inputs: Vec<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Number of map nodes.
    #[arg(long, value_name = "M")]
    nodes: Option<usize>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    /// cartesian, uniform or auto; repeat to benchmark several.
    #[arg(long = "method", value_name = "METHOD")]
    methods: Vec<Method>,
    /// Via point on a 1-based node index, `idx:x,y[,z]`.
    #[arg(long = "constraint", value_name = "IDX:X,Y[,Z]")]
    constraints: Vec<ViaPoint>,
    /// Pin the first node.
    #[arg(long, value_name = "X,Y[,Z]")]
    start: Option<PointArg>,
    /// Pin the last node.
    #[arg(long, value_name = "X,Y[,Z]")]
    end: Option<PointArg>,
    /// Output directory (default `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Recorded with the run; fits themselves are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Tune weights on the first iteration only.
    #[arg(long)]
    freeze_tuning: bool,
    /// Also write an SVG overlay of demonstrations and reproduction.
    #[arg(long)]
    svg: bool,
    /// JSON run manifest; flags override its fields.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// line, arc, s-curve or n-shape.
    #[arg(long, default_value = "s-curve")]
    shape: Shape,
    #[arg(long, default_value_t = 5)]
    demos: usize,
    /// Points per demonstration.
    #[arg(long, default_value_t = 100)]
    len: usize,
    /// Per-point Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Per-demo translation standard deviation.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.csv` writes CSV, anything else JSON.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

/// A point given on the command line as `x,y[,z]`.
#[derive(Debug, Clone)]
struct PointArg(Vec<f64>);

impl std::str::FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        manifest::parse_point(s).map(PointArg)
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: mc_elmap::Error| e.to_string())
}

impl RunArgs {
    fn into_manifest(self) -> Result<RunManifest, CliError> {
        let base = match &self.manifest {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::default(),
        };
        let flags = RunManifest {
            inputs: self.inputs,
            format: self.format,
            nodes: self.nodes,
            lambda0: self.lambda0,
            mu0: self.mu0,
            max_iters: self.max_iters,
            freeze_tuning: self.freeze_tuning.then_some(true),
            methods: (!self.methods.is_empty()).then_some(self.methods),
            constraints: self.constraints,
            start: self.start.map(|p| p.0),
            end: self.end.map(|p| p.0),
            out: self.out,
            seed: self.seed,
            svg: self.svg.then_some(true),
        };
        Ok(base.overlay(flags))
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    if args.demos == 0 || args.len < 3 {
        return Err(CliError::usage("need at least one demo of at least 3 points"));
    }
    if !(args.noise >= 0.0 && args.offset >= 0.0 && args.noise.is_finite() && args.offset.is_finite()) {
        return Err(CliError::usage("noise and offset must be finite and non-negative"));
    }
    let opts = SynthOptions { len: args.len, noise_sd: args.noise, offset_sd: args.offset };
    let demos = synth_demos_with(args.shape, args.demos, opts, args.seed);
    let text = match args.output.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => demos_to_csv(&demos),
        _ => demos_to_json(&demos),
    };
    write_file(&args.output, &text)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Reproduce(a) => a.into_manifest().and_then(|m| reproduce::cmd_reproduce(&m).map(|_| ())),
        Command::Benchmark(a) => a.into_manifest().and_then(|m| benchmark::cmd_benchmark(&m).map(|_| ())),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
