//! The `reproduce` command and the per-run artifacts it shares with
//! `benchmark`.

use std::path::PathBuf;

use mc_elmap::autotune::WeightState;
use mc_elmap::dataset::{points_to_csv, DemonstrationSet};
use mc_elmap::em::{reproduce, FitResult};
use mc_elmap::metrics::{jerk, MetricsReport};
use mc_elmap::solver::EnergyReport;
use mc_elmap::Trajectory;
use serde::Serialize;

use crate::manifest::{Method, RunManifest};
use crate::{write_file, CliError};

/// A finished fit and its scores against the demonstrations.
#[derive(Debug, Clone)]
pub struct Run {
    pub method: Method,
    pub fit: FitResult,
    pub metrics: MetricsReport,
    /// Mean jerk of the demonstrations, for comparison with `metrics.jerk`.
    pub demo_mean_jerk: f64,
}

pub fn run_method(set: &DemonstrationSet, m: &RunManifest, method: Method) -> Result<Run, CliError> {
    let cfg = m.fit_config(method)?;
    let cons = m.constraints(cfg.nodes, set.dim())?;
    let fit = reproduce(set, cons.start, cons.end, &cons.vias, &cfg)?;
    let repro = Trajectory::new(fit.nodes.clone())?;
    let metrics = MetricsReport::against_set(&repro, set.demos())?;
    let mut demo_mean_jerk = 0.0;
    for d in set.demos() {
        demo_mean_jerk += jerk(d)? / set.num_demos() as f64;
    }
    Ok(Run { method, fit, metrics, demo_mean_jerk })
}

#[derive(Serialize)]
struct WeightsEntry<'a> {
    iteration: usize,
    #[serde(flatten)]
    weights: &'a WeightState,
}

#[derive(Serialize)]
struct EnergiesEntry<'a> {
    iteration: usize,
    #[serde(flatten)]
    energies: &'a EnergyReport,
    constraint_violation: f64,
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    method: &'static str,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
    demo_mean_jerk: f64,
    iterations: usize,
    converged: bool,
}

/// File name and contents of every artifact of one run.
pub fn artifacts(set: &DemonstrationSet, run: &Run, svg: bool) -> Vec<(&'static str, String)> {
    let trace = &run.fit.trace;
    let weights: Vec<_> = trace.iter().map(|r| WeightsEntry { iteration: r.iteration, weights: &r.weights }).collect();
    let energies: Vec<_> = trace
        .iter()
        .map(|r| EnergiesEntry {
            iteration: r.iteration,
            energies: &r.energies,
            constraint_violation: r.constraint_violation,
        })
        .collect();
    let metrics = MetricsDoc {
        method: run.method.name(),
        metrics: &run.metrics,
        demo_mean_jerk: run.demo_mean_jerk,
        iterations: run.fit.iterations,
        converged: run.fit.converged,
    };
    let mut out = vec![
        ("reproduction.csv", points_to_csv(&run.fit.nodes)),
        ("weights.json", pretty(&weights)),
        ("energies.json", pretty(&energies)),
        ("metrics.json", pretty(&metrics)),
    ];
    if svg {
        out.push(("overlay.svg", crate::svg::overlay(set.demos(), &run.fit.nodes)));
    }
    out
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts hold finite numbers");
    s.push('\n');
    s
}

/// Fits, then writes all artifacts to the output directory. Nothing is
/// written unless the fit succeeds.
pub fn cmd_reproduce(m: &RunManifest) -> Result<PathBuf, CliError> {
    let methods = m.methods.clone().unwrap_or_else(|| vec![Method::Auto]);
    let method = match methods.as_slice() {
        [one] => *one,
        [] => return Err(CliError::usage("method list is empty")),
        _ => return Err(CliError::usage("reproduce takes a single --method")),
    };
    let set = m.load_pooled()?;
    let run = run_method(&set, m, method)?;
    let dir = m.out_dir();
    for (name, text) in artifacts(&set, &run, m.svg.unwrap_or(false)) {
        write_file(&dir.join(name), &text)?;
    }
    Ok(dir)
}
