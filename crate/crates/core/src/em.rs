//! The expectation-maximization fit: alternate nearest-node clustering,
//! weight tuning and the constrained solve until the clustering stops
//! changing.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::autotune::{
    compute_betas, compute_smoothing, optimize_alphas, weights_from, AlphaProblem, FrameWeights, Smoothing,
    WeightState,
};
use crate::clustering::{assign, per_demo_clusterings, Clustering};
use crate::coordinates::Frame;
use crate::dataset::{resample_points, DemonstrationSet};
use crate::solver::{energies, solve, EnergyReport, PointConstraint};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of map nodes `M`.
    pub nodes: usize,
    pub lambda0: f64,
    pub mu0: f64,
    pub max_iters: usize,
    /// Re-tune weights on every iteration instead of only the first.
    pub retune_every_iteration: bool,
    /// Fixed `[w_X, w_T, w_L]`; disables the alpha/beta tuning.
    pub fixed_weights: Option<[f64; 3]>,
    /// Fixed `(lambda, mu)`; disables the smoothing tuning.
    pub fixed_smoothing: Option<(f64, f64)>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            nodes: 100,
            lambda0: 1.5,
            mu0: 1.5,
            max_iters: 100,
            retune_every_iteration: true,
            fixed_weights: None,
            fixed_smoothing: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 nodes, got {}", self.nodes)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if let Some(w) = self.fixed_weights {
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) || !(w.iter().sum::<f64>() > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fixed weights must be non-negative with a positive sum, got {w:?}"
                )));
            }
        }
        if let Some((l, m)) = self.fixed_smoothing {
            if !(l.is_finite() && m.is_finite() && l >= 0.0 && m >= 0.0) {
                return Err(Error::InvalidParameter(format!("invalid fixed smoothing ({l}, {m})")));
            }
        }
        for (name, v) in [("lambda0", self.lambda0), ("mu0", self.mu0)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// State recorded after the M-step of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub weights: WeightState,
    /// Energies of the new nodes under this iteration's clustering and weights.
    pub energies: EnergyReport,
    /// Node index of every concatenated data point used by this iteration.
    pub assignment: Vec<usize>,
    /// Largest absolute constraint violation of this iteration's solution.
    pub constraint_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub nodes: DMatrix<f64>,
    pub weights: WeightState,
    pub energies: EnergyReport,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

impl FitResult {
    pub fn max_constraint_violation(&self) -> f64 {
        self.trace.iter().map(|r| r.constraint_violation).fold(0.0, f64::max)
    }
}

/// Pointwise mean of the aligned demos resampled to `nodes` points.
pub fn initial_nodes(set: &DemonstrationSet, nodes: usize) -> DMatrix<f64> {
    resample_points(&set.mean_demo(), nodes)
}

fn constraint_violation(y: &DMatrix<f64>, cons: &[PointConstraint]) -> f64 {
    cons.iter()
        .map(|c| (y.row(c.node) - &c.target).amax())
        .fold(0.0, f64::max)
}

struct Tuner<'a> {
    set: &'a DemonstrationSet,
    cons: &'a [PointConstraint],
    cfg: &'a FitConfig,
    smoothing: Option<Smoothing>,
}

impl Tuner<'_> {
    fn smoothing(&self, y: &DMatrix<f64>, cl: &Clustering, w: [f64; 3]) -> Result<Smoothing> {
        match self.cfg.fixed_smoothing {
            Some((lambda, mu)) => Ok(Smoothing { lambda, mu }),
            None => compute_smoothing(y, self.set, cl, w, self.cfg.lambda0, self.cfg.mu0, self.smoothing),
        }
    }

    fn tune(&mut self, y: &DMatrix<f64>, cl: &Clustering) -> Result<WeightState> {
        let per_demo = per_demo_clusterings(self.set, y)?;
        let beta = compute_betas(y, self.set, &per_demo)?;
        let (alpha, w) = match self.cfg.fixed_weights {
            Some(w) => (FrameWeights::normalized(w)?, w),
            None => {
                // The alpha search needs (lambda, mu); before the first tuning
                // they come from the uniform-alpha weights.
                let inner = match self.smoothing {
                    Some(s) if self.cfg.fixed_smoothing.is_none() => s,
                    _ => self.smoothing(y, cl, weights_from(&FrameWeights::UNIFORM, &beta))?,
                };
                let problem = AlphaProblem {
                    set: self.set,
                    clustering: cl,
                    per_demo: &per_demo,
                    constraints: self.cons,
                    beta,
                    lambda: inner.lambda,
                    mu: inner.mu,
                };
                let alpha = optimize_alphas(&problem)?;
                (alpha, weights_from(&alpha, &beta))
            }
        };
        let smoothing = self.smoothing(y, cl, w)?;
        self.smoothing = Some(smoothing);
        Ok(WeightState {
            alpha,
            beta,
            w,
            lambda: smoothing.lambda,
            mu: smoothing.mu,
            lambda0: self.cfg.lambda0,
            mu0: self.cfg.mu0,
        })
    }
}

/// Fits a map to `set` with hard point constraints.
pub fn fit(set: &DemonstrationSet, cons: &[PointConstraint], cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let m = cfg.nodes;
    if let Some(c) = cons.iter().find(|c| c.node >= m) {
        return Err(Error::InvalidParameter(format!(
            "constraint on node {} but the map has {m} nodes",
            c.node
        )));
    }
    let data = set.data(Frame::Cartesian);
    let mut y = initial_nodes(set, m);
    let mut tuner = Tuner { set, cons, cfg, smoothing: None };
    let mut weights: Option<WeightState> = None;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iters {
        let cl = assign(data, &y)?;
        if trace.last().is_some_and(|r| r.assignment == cl.assignment()) {
            converged = true;
            break;
        }
        let state = match weights {
            Some(w) if !cfg.retune_every_iteration => w,
            _ => tuner.tune(&y, &cl)?,
        };
        weights = Some(state);
        let params = state.params();
        y = solve(set, &cl, &params, cons, m)?;
        trace.push(IterationRecord {
            iteration,
            weights: state,
            energies: energies(&y, set, &cl, &params)?,
            assignment: cl.assignment().to_vec(),
            constraint_violation: constraint_violation(&y, cons),
        });
    }
    if !converged {
        // The loop may end exactly at a fixed point.
        let cl = assign(data, &y)?;
        converged = trace.last().is_some_and(|r| r.assignment == cl.assignment());
    }

    let last = trace.last().expect("max_iters >= 1");
    Ok(FitResult {
        nodes: y,
        weights: last.weights,
        energies: last.energies,
        iterations: trace.len(),
        converged,
        trace,
    })
}

/// Fits with optional start/end pins and 0-based via points.
pub fn reproduce(
    set: &DemonstrationSet,
    start: Option<Point>,
    end: Option<Point>,
    vias: &[(usize, Point)],
    cfg: &FitConfig,
) -> Result<FitResult> {
    let mut cons = Vec::new();
    if let Some(p) = start {
        cons.push(PointConstraint::new(0, p));
    }
    if let Some(p) = end {
        cons.push(PointConstraint::new(cfg.nodes.saturating_sub(1), p));
    }
    cons.extend(vias.iter().map(|(i, p)| PointConstraint::new(*i, p.clone())));
    fit(set, &cons, cfg)
}
