//! Plain-Rust side of the demo. Inputs and outputs are JSON strings so the
//! page needs no extra bindings.

use mc_elmap::autotune::FrameWeights;
use mc_elmap::coordinates::transform;
use mc_elmap::dataset::{demos_to_json, parse_demonstrations, synth_demos_with, DemonstrationSet, Format, Shape, SynthOptions};
use mc_elmap::em::{reproduce, FitConfig};
use mc_elmap::metrics::MetricsReport;
use mc_elmap::{Frame, Point, Trajectory};
use serde::{Deserialize, Serialize};

pub type ApiResult<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Synthetic demonstrations as `{"demos": [[[x, y], ...], ...]}`.
pub fn synthesize(shape: &str, demos: usize, noise: f64, offset: f64, seed: u64) -> ApiResult<String> {
    let shape: Shape = shape.parse().map_err(err)?;
    if !(1..=20).contains(&demos) {
        return Err(format!("number of demos must be in 1..=20, got {demos}"));
    }
    if !(noise >= 0.0 && offset >= 0.0 && noise.is_finite() && offset.is_finite()) {
        return Err("noise and offset must be finite and non-negative".into());
    }
    let opts = SynthOptions { len: 100, noise_sd: noise, offset_sd: offset };
    Ok(demos_to_json(&synth_demos_with(shape, demos, opts, seed)))
}

#[derive(Debug, Clone, Deserialize)]
pub struct FitRequest {
    pub method: String,
    pub nodes: usize,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub end: Option<Vec<f64>>,
    #[serde(default)]
    pub freeze_tuning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResponse {
    pub nodes: Vec<Vec<f64>>,
    pub alpha: FrameWeights,
    pub beta: FrameWeights,
    pub w: [f64; 3],
    pub lambda: f64,
    pub mu: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: MetricsReport,
}

/// Fits a map to `demos_json` as described by `request_json`.
pub fn fit(demos_json: &str, request_json: &str) -> ApiResult<String> {
    let demos = parse_demonstrations(demos_json, Format::Json).map_err(err)?;
    let req: FitRequest = serde_json::from_str(request_json).map_err(err)?;
    let set = DemonstrationSet::new(demos, None).map_err(err)?;
    let fixed_weights = match req.method.as_str() {
        "cartesian" => Some([1.0, 0.0, 0.0]),
        "uniform" => Some([1.0 / 3.0; 3]),
        "auto" => None,
        other => return Err(format!("unknown method '{other}'")),
    };
    let cfg = FitConfig {
        nodes: req.nodes,
        fixed_weights,
        retune_every_iteration: !req.freeze_tuning,
        ..Default::default()
    };
    let point = |v: Option<Vec<f64>>| -> ApiResult<Option<Point>> {
        match v {
            None => Ok(None),
            Some(v) if v.len() == set.dim() => Ok(Some(Point::from_vec(v))),
            Some(v) => Err(format!("point has {} coordinates, demos have {}", v.len(), set.dim())),
        }
    };
    let res = reproduce(&set, point(req.start)?, point(req.end)?, &[], &cfg).map_err(err)?;
    let repro = Trajectory::new(res.nodes.clone()).map_err(err)?;
    let metrics = MetricsReport::against_set(&repro, set.demos()).map_err(err)?;
    let out = FitResponse {
        nodes: repro.to_rows(),
        alpha: res.weights.alpha,
        beta: res.weights.beta,
        w: res.weights.w,
        lambda: res.weights.lambda,
        mu: res.weights.mu,
        iterations: res.iterations,
        converged: res.converged,
        metrics,
    };
    serde_json::to_string(&out).map_err(err)
}

/// Tangent or Laplacian image of a point list `[[x, y], ...]`.
pub fn differential(points_json: &str, frame: &str) -> ApiResult<String> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(points_json).map_err(err)?;
    let traj = Trajectory::from_rows(&rows).map_err(err)?;
    let frame = match frame {
        "cartesian" => Frame::Cartesian,
        "tangent" => Frame::Tangent,
        "laplacian" => Frame::Laplacian,
        other => return Err(format!("unknown frame '{other}'")),
    };
    serde_json::to_string(&transform(&traj, frame).to_rows()).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesize_then_fit() {
        let demos = synthesize("n-shape", 3, 0.01, 0.05, 2).unwrap();
        let req = r#"{"method": "auto", "nodes": 30, "start": [0.1, -0.1], "freeze_tuning": true}"#;
        let out: serde_json::Value = serde_json::from_str(&fit(&demos, req).unwrap()).unwrap();
        let nodes = out["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 30);
        assert_eq!(nodes[0], serde_json::json!([0.1, -0.1]));
        let alpha = &out["alpha"];
        let sum: f64 = ["cartesian", "tangent", "laplacian"].iter().map(|k| alpha[k].as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(out["metrics"]["frechet"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn bad_requests_are_errors() {
        let demos = synthesize("arc", 2, 0.0, 0.0, 1).unwrap();
        assert!(synthesize("spiral", 2, 0.0, 0.0, 1).is_err());
        assert!(synthesize("arc", 0, 0.0, 0.0, 1).is_err());
        assert!(fit(&demos, r#"{"method": "best", "nodes": 20}"#).is_err());
        assert!(fit(&demos, r#"{"method": "auto", "nodes": 2}"#).is_err());
        assert!(fit(&demos, r#"{"method": "auto", "nodes": 20, "start": [1.0]}"#).is_err());
        assert!(fit("{}", r#"{"method": "auto", "nodes": 20}"#).is_err());
    }

    #[test]
    fn differential_views() {
        let pts = "[[0, 0], [1, 0], [3, 0], [6, 0]]";
        let t: Vec<Vec<f64>> = serde_json::from_str(&differential(pts, "tangent").unwrap()).unwrap();
        assert_eq!(t, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]);
        let l: Vec<Vec<f64>> = serde_json::from_str(&differential(pts, "laplacian").unwrap()).unwrap();
        assert_eq!(l[1], vec![0.5, 0.0]);
        assert!(differential(pts, "polar").is_err());
    }
}
