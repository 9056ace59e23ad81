//! Run configuration: command-line flags layered over an optional JSON
//! manifest layered over defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use mc_elmap::dataset::{load_demonstrations, DemonstrationSet, Format};
use mc_elmap::em::FitConfig;
use mc_elmap::{Point, Trajectory};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fixed weights (1, 0, 0).
    Cartesian,
    /// Fixed weights (1/3, 1/3, 1/3).
    Uniform,
    /// Full automatic tuning.
    Auto,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cartesian, Method::Uniform, Method::Auto];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cartesian => "cartesian",
            Method::Uniform => "uniform",
            Method::Auto => "auto",
        }
    }

    pub fn fixed_weights(self) -> Option<[f64; 3]> {
        match self {
            Method::Cartesian => Some([1.0, 0.0, 0.0]),
            Method::Uniform => Some([1.0 / 3.0; 3]),
            Method::Auto => None,
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cartesian" | "cart" => Ok(Method::Cartesian),
            "uniform" | "uni" => Ok(Method::Uniform),
            "auto" => Ok(Method::Auto),
            other => Err(format!("unknown method '{other}' (expected cartesian, uniform or auto)")),
        }
    }
}

/// A via point on a 1-based node index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViaPoint {
    pub node: usize,
    pub point: Vec<f64>,
}

impl FromStr for ViaPoint {
    type Err = String;

    /// `idx:x,y[,z]`
    fn from_str(s: &str) -> Result<Self, String> {
        let (idx, coords) = s
            .split_once(':')
            .ok_or_else(|| format!("constraint '{s}' is not of the form idx:x,y[,z]"))?;
        let node = idx
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("constraint '{s}': '{idx}' is not a node index"))?;
        Ok(ViaPoint { node, point: parse_point(coords)? })
    }
}

pub fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.len() <= 3 && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(format!("'{s}' is not a point of 1 to 3 finite comma-separated numbers")),
    }
}

/// Every field is optional so that a manifest can set any subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub inputs: Vec<PathBuf>,
    pub format: Option<Format>,
    pub nodes: Option<usize>,
    pub lambda0: Option<f64>,
    pub mu0: Option<f64>,
    pub max_iters: Option<usize>,
    pub freeze_tuning: Option<bool>,
    pub methods: Option<Vec<Method>>,
    pub constraints: Vec<ViaPoint>,
    pub start: Option<Vec<f64>>,
    pub end: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: Option<bool>,
}

impl RunManifest {
    /// Reads a manifest; relative paths in it are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in m.inputs.iter_mut().chain(m.out.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }

    /// Fields set in `over` replace those of `self`.
    pub fn overlay(mut self, over: RunManifest) -> Self {
        if !over.inputs.is_empty() {
            self.inputs = over.inputs;
        }
        if !over.constraints.is_empty() {
            self.constraints = over.constraints;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(format, nodes, lambda0, mu0, max_iters, freeze_tuning, methods, start, end, out, seed, svg);
        self
    }

    pub fn methods(&self) -> Result<Vec<Method>, CliError> {
        match &self.methods {
            None => Ok(Method::ALL.to_vec()),
            Some(m) if m.is_empty() => Err(CliError::usage("method list is empty")),
            Some(m) => Ok(m.clone()),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn fit_config(&self, method: Method) -> Result<FitConfig, CliError> {
        let d = FitConfig::default();
        let cfg = FitConfig {
            nodes: self.nodes.unwrap_or(d.nodes),
            lambda0: self.lambda0.unwrap_or(d.lambda0),
            mu0: self.mu0.unwrap_or(d.mu0),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            retune_every_iteration: !self.freeze_tuning.unwrap_or(false),
            fixed_weights: method.fixed_weights(),
            fixed_smoothing: None,
        };
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }

    fn format_for(&self, path: &Path) -> Format {
        self.format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
    }

    pub fn load_file(&self, path: &Path) -> Result<Vec<Trajectory>, CliError> {
        load_demonstrations(path, self.format_for(path)).map_err(|e| match e {
            mc_elmap::Error::Io(io) => CliError::usage(format!("cannot read {}: {io}", path.display())),
            other => CliError::usage(other.to_string()),
        })
    }

    /// All input files pooled into one demonstration set.
    pub fn load_pooled(&self) -> Result<DemonstrationSet, CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::usage("no input files given"));
        }
        let mut demos = Vec::new();
        for p in &self.inputs {
            demos.extend(self.load_file(p)?);
        }
        DemonstrationSet::new(demos, None).map_err(|e| CliError::usage(e.to_string()))
    }

    /// Start, end and 0-based via points, checked against the map size and
    /// data dimension.
    pub fn constraints(&self, nodes: usize, dim: usize) -> Result<Constraints, CliError> {
        let point = |v: &Vec<f64>, what: &str| -> Result<Point, CliError> {
            if v.len() != dim {
                return Err(CliError::usage(format!(
                    "{what} has {} coordinates but the demonstrations have {dim}",
                    v.len()
                )));
            }
            Ok(Point::from_row_slice(v))
        };
        let start = self.start.as_ref().map(|v| point(v, "--start")).transpose()?;
        let end = self.end.as_ref().map(|v| point(v, "--end")).transpose()?;
        let mut vias = Vec::new();
        for c in &self.constraints {
            if c.node == 0 || c.node > nodes {
                return Err(CliError::usage(format!(
                    "constraint node {} is outside 1..={nodes}",
                    c.node
                )));
            }
            let node = c.node - 1;
            let taken = vias.iter().any(|(i, _)| *i == node)
                || (node == 0 && start.is_some())
                || (node == nodes - 1 && end.is_some());
            if taken {
                return Err(CliError::usage(format!("node {} is constrained twice", c.node)));
            }
            vias.push((node, point(&c.point, &format!("constraint on node {}", c.node))?));
        }
        Ok(Constraints { start, end, vias })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Constraints {
    pub start: Option<Point>,
    pub end: Option<Point>,
    pub vias: Vec<(usize, Point)>,
}
