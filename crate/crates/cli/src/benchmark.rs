//! The `benchmark` command: every method on every dataset.

use std::path::{Path, PathBuf};

use mc_elmap::dataset::DemonstrationSet;
use mc_elmap::metrics::{angular_similarity, frechet, sse, MetricsReport};
use mc_elmap::Trajectory;

use crate::manifest::{Method, RunManifest};
use crate::reproduce::{artifacts, run_method, Run};
use crate::{write_file, CliError};

pub struct Dataset {
    pub name: String,
    pub set: DemonstrationSet,
}

/// One table row; `run` is `None` when the fit failed.
pub struct Cell {
    pub dataset: String,
    pub method: Method,
    pub run: Result<Run, CliError>,
}

pub struct Benchmark {
    pub datasets: Vec<Dataset>,
    pub cells: Vec<Cell>,
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Loads every input file as its own dataset.
pub fn load_datasets(m: &RunManifest) -> Result<Vec<Dataset>, CliError> {
    if m.inputs.is_empty() {
        return Err(CliError::usage("no input datasets given"));
    }
    let mut out: Vec<Dataset> = Vec::new();
    for path in &m.inputs {
        let mut name = dataset_name(path);
        let mut k = 2;
        while out.iter().any(|d| d.name == name) {
            name = format!("{}-{k}", dataset_name(path));
            k += 1;
        }
        let set = DemonstrationSet::new(m.load_file(path)?, None).map_err(|e| CliError::usage(e.to_string()))?;
        out.push(Dataset { name, set });
    }
    Ok(out)
}

/// Runs all (dataset, method) pairs, in parallel.
pub fn run_benchmark(m: &RunManifest) -> Result<Benchmark, CliError> {
    let methods = m.methods()?;
    for method in &methods {
        m.fit_config(*method)?;
    }
    let datasets = load_datasets(m)?;
    let jobs: Vec<(usize, Method)> =
        (0..datasets.len()).flat_map(|d| methods.iter().map(move |&k| (d, k))).collect();
    let results: Vec<Result<Run, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(d, method)| {
                let set = &datasets[d].set;
                scope.spawn(move || run_method(set, m, method))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark worker panicked")).collect()
    });
    let cells = jobs
        .into_iter()
        .zip(results)
        .map(|((d, method), run)| Cell { dataset: datasets[d].name.clone(), method, run })
        .collect();
    Ok(Benchmark { datasets, cells })
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

impl Benchmark {
    /// Per-metric normalization by the worst (largest) value among the
    /// successful runs on the same dataset. A metric that is zero for every
    /// run normalizes to 1 everywhere.
    pub fn normalized(&self, cell: &Cell) -> Option<[f64; 4]> {
        let raw = cell.run.as_ref().ok()?.metrics.as_array();
        let mut worst = [0.0f64; 4];
        for other in self.cells.iter().filter(|c| c.dataset == cell.dataset) {
            if let Ok(r) = &other.run {
                for (w, v) in worst.iter_mut().zip(r.metrics.as_array()) {
                    *w = w.max(v);
                }
            }
        }
        Some([0, 1, 2, 3].map(|k| if worst[k] > 0.0 { raw[k] / worst[k] } else { 1.0 }))
    }

    pub fn table_csv(&self) -> String {
        let names = MetricsReport::NAMES;
        let mut header = vec!["dataset".to_string(), "method".to_string()];
        header.extend(names.iter().map(|n| n.to_string()));
        header.extend(names.iter().map(|n| format!("{n}_norm")));
        header.extend(["w_x", "w_t", "w_l", "iterations", "converged"].map(String::from));
        let mut out = header.join(",");
        out.push('\n');
        for cell in &self.cells {
            let mut row = vec![cell.dataset.clone(), cell.method.name().to_string()];
            match (&cell.run, self.normalized(cell)) {
                (Ok(run), Some(norm)) => {
                    row.extend(run.metrics.as_array().map(fmt));
                    row.extend(norm.map(fmt));
                    row.extend(run.fit.weights.w.map(fmt));
                    row.push(run.fit.iterations.to_string());
                    row.push(run.fit.converged.to_string());
                }
                _ => row.extend(std::iter::repeat_n(String::new(), 13)),
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Per-demo scores of every successful run on `dataset`.
    pub fn boxplot_csv(&self, dataset: &Dataset) -> Result<String, CliError> {
        let mut out = String::from("method,demo,frechet,sse,angular,jerk\n");
        for cell in self.cells.iter().filter(|c| c.dataset == dataset.name) {
            let Ok(run) = &cell.run else { continue };
            let repro = Trajectory::new(run.fit.nodes.clone())?;
            for (k, demo) in dataset.set.demos().iter().enumerate() {
                let values = [
                    frechet(&repro, demo)?,
                    sse(&repro, demo)?,
                    angular_similarity(&repro, demo)?,
                    run.metrics.jerk,
                ];
                out.push_str(&format!("{},{k},{}\n", cell.method.name(), values.map(fmt).join(",")));
            }
        }
        Ok(out)
    }
}

/// Runs the benchmark and writes `table.csv`, `<dataset>/boxplot_data.csv`
/// and the artifacts of each run under `<dataset>/<method>/`. Fails only if
/// no run succeeded.
pub fn cmd_benchmark(m: &RunManifest) -> Result<PathBuf, CliError> {
    let bench = run_benchmark(m)?;
    if let Some(first) = bench.cells.iter().find_map(|c| c.run.as_ref().err()).cloned() {
        if bench.cells.iter().all(|c| c.run.is_err()) {
            return Err(first);
        }
    }
    let dir = m.out_dir();
    let svg = m.svg.unwrap_or(false);
    for cell in &bench.cells {
        match &cell.run {
            Ok(run) => {
                let ds = bench.datasets.iter().find(|d| d.name == cell.dataset).expect("known dataset");
                let run_dir = dir.join(&cell.dataset).join(cell.method.name());
                for (name, text) in artifacts(&ds.set, run, svg) {
                    write_file(&run_dir.join(name), &text)?;
                }
            }
            Err(e) => eprintln!("warning: {} / {}: {e}", cell.dataset, cell.method.name()),
        }
    }
    for ds in &bench.datasets {
        write_file(&dir.join(&ds.name).join("boxplot_data.csv"), &bench.boxplot_csv(ds)?)?;
    }
    write_file(&dir.join("table.csv"), &bench.table_csv())?;
    Ok(dir)
}
