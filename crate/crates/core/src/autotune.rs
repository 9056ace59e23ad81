//! Automatic tuning of the energy weights.
//!
//! Approximation weights are `w_c = alpha_c / beta_c`: `beta` normalizes the
//! per-frame costs of the current map so no frame dominates through scale
//! alone, and `alpha` is chosen on the 2-simplex to minimize the Cartesian
//! reproduction error of the re-solved map. Stretching and bending weights
//! are set so that their energies match the total approximation energy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::coordinates::{Frame, MatrixKind};
use crate::dataset::DemonstrationSet;
use crate::solver::{self, approximation_cost, regularizer_cost, EnergyParams, PointConstraint};
use crate::{Error, Result};

/// Below this total per-frame cost the betas fall back to uniform.
pub const BETA_ZERO_COST: f64 = 1e-15;
/// Betas are floored here before dividing.
pub const BETA_FLOOR: f64 = 1e-6;
/// Coarse grid step on the alpha simplex, in hundredths.
pub const COARSE_STEP: u32 = 5;
/// Half-width of the refinement window, in hundredths.
pub const REFINE_RADIUS: i32 = 2;

/// A point on the unit 2-simplex, one entry per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameWeights {
    pub cartesian: f64,
    pub tangent: f64,
    pub laplacian: f64,
}

impl FrameWeights {
    pub const UNIFORM: FrameWeights = FrameWeights {
        cartesian: 1.0 / 3.0,
        tangent: 1.0 / 3.0,
        laplacian: 1.0 / 3.0,
    };

    pub fn new(cartesian: f64, tangent: f64, laplacian: f64) -> Self {
        Self { cartesian, tangent, laplacian }
    }

    /// Builds a simplex point from the first two coordinates.
    pub fn from_xt(cartesian: f64, tangent: f64) -> Self {
        let laplacian = (1.0 - cartesian - tangent).max(0.0);
        Self { cartesian, tangent, laplacian }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.cartesian, self.tangent, self.laplacian]
    }

    pub fn get(&self, frame: Frame) -> f64 {
        match frame {
            Frame::Cartesian => self.cartesian,
            Frame::Tangent => self.tangent,
            Frame::Laplacian => self.laplacian,
        }
    }

    pub fn sum(&self) -> f64 {
        self.cartesian + self.tangent + self.laplacian
    }

    /// Rescales non-negative values to sum to one.
    pub fn normalized(values: [f64; 3]) -> Result<Self> {
        let total: f64 = values.iter().sum();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) || !(total > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights must be non-negative with a positive sum, got {values:?}"
            )));
        }
        Ok(Self::new(values[0] / total, values[1] / total, values[2] / total))
    }
}

/// Hyperparameters in force for one EM iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    pub alpha: FrameWeights,
    pub beta: FrameWeights,
    /// `[w_X, w_T, w_L]`
    pub w: [f64; 3],
    pub lambda: f64,
    pub mu: f64,
    pub lambda0: f64,
    pub mu0: f64,
}

impl WeightState {
    pub fn params(&self) -> EnergyParams {
        EnergyParams::new(self.w, self.lambda, self.mu)
    }
}

/// `w_c = alpha_c / max(beta_c, BETA_FLOOR)`.
pub fn weights_from(alpha: &FrameWeights, beta: &FrameWeights) -> [f64; 3] {
    let a = alpha.as_array();
    let b = beta.as_array();
    [0, 1, 2].map(|k| a[k] / b[k].max(BETA_FLOOR))
}

/// Total unweighted per-demo cost in each frame, `sum_j |W_j T_c y - K_j D_c,j|^2`.
pub fn frame_costs(y: &DMatrix<f64>, set: &DemonstrationSet, per_demo: &[Clustering]) -> Result<[f64; 3]> {
    if per_demo.len() != set.num_demos() {
        return Err(Error::Dimension(format!(
            "{} per-demo clusterings for {} demos",
            per_demo.len(),
            set.num_demos()
        )));
    }
    let mut costs = [0.0; 3];
    for (k, frame) in Frame::ALL.into_iter().enumerate() {
        for (demo, cl) in set.frame_demos(frame).iter().zip(per_demo) {
            costs[k] += approximation_cost(y, demo.points(), cl, frame)?;
        }
    }
    Ok(costs)
}

/// Scaling factors: per-frame costs normalized to sum to one.
pub fn compute_betas(y: &DMatrix<f64>, set: &DemonstrationSet, per_demo: &[Clustering]) -> Result<FrameWeights> {
    let costs = frame_costs(y, set, per_demo)?;
    if costs.iter().any(|&c| c < BETA_ZERO_COST) {
        return Ok(FrameWeights::UNIFORM);
    }
    FrameWeights::normalized(costs)
}

/// Everything the alpha search holds fixed.
#[derive(Debug, Clone, Copy)]
pub struct AlphaProblem<'a> {
    pub set: &'a DemonstrationSet,
    pub clustering: &'a Clustering,
    pub per_demo: &'a [Clustering],
    pub constraints: &'a [PointConstraint],
    pub beta: FrameWeights,
    pub lambda: f64,
    pub mu: f64,
}

impl AlphaProblem<'_> {
    /// Cartesian reproduction error `sum_j |W_j y(alpha) - K_j D_j|^2` of the
    /// map re-solved with weights derived from `alpha`.
    pub fn objective(&self, alpha: &FrameWeights) -> Result<f64> {
        let nodes = self.clustering.num_nodes();
        let p = EnergyParams::new(weights_from(alpha, &self.beta), self.lambda, self.mu);
        let y = solver::solve(self.set, self.clustering, &p, self.constraints, nodes)?;
        let mut err = 0.0;
        for (demo, cl) in self.set.demos().iter().zip(self.per_demo) {
            err += approximation_cost(&y, demo.points(), cl, Frame::Cartesian)?;
        }
        Ok(err)
    }

    /// Two objective values closer than this are treated as equal.
    pub fn tie_tolerance(&self, a: f64, b: f64) -> f64 {
        let data_scale: f64 = self.set.data(Frame::Cartesian).norm_squared();
        1e-12 * a.abs().max(b.abs()) + 1e-16 * data_scale
    }
}

/// Candidates of the coarse pass: the 0.05 lattice on the simplex plus the
/// uniform point, ordered by decreasing alpha_X, then decreasing alpha_T.
pub fn coarse_candidates() -> Vec<FrameWeights> {
    let steps = 100 / COARSE_STEP;
    let mut out: Vec<FrameWeights> = Vec::new();
    for i in (0..=steps).rev() {
        for j in (0..=steps - i).rev() {
            let ax = f64::from(i * COARSE_STEP) / 100.0;
            let at = f64::from(j * COARSE_STEP) / 100.0;
            out.push(FrameWeights::new(ax, at, f64::from(100 - (i + j) * COARSE_STEP) / 100.0));
        }
    }
    let pos = out
        .iter()
        .position(|a| (a.cartesian, a.tangent) < (FrameWeights::UNIFORM.cartesian, FrameWeights::UNIFORM.tangent))
        .unwrap_or(out.len());
    out.insert(pos, FrameWeights::UNIFORM);
    out
}

/// The 0.01 lattice window of half-width 0.02 around `center`, clipped to
/// the simplex, in the same order as [`coarse_candidates`].
pub fn refine_candidates(center: &FrameWeights) -> Vec<FrameWeights> {
    let mut out = Vec::new();
    for di in (-REFINE_RADIUS..=REFINE_RADIUS).rev() {
        for dj in (-REFINE_RADIUS..=REFINE_RADIUS).rev() {
            let ax = center.cartesian + f64::from(di) / 100.0;
            let at = center.tangent + f64::from(dj) / 100.0;
            let al = 1.0 - ax - at;
            if ax < -1e-12 || at < -1e-12 || al < -1e-12 {
                continue;
            }
            out.push(FrameWeights::new(ax.max(0.0), at.max(0.0), al.max(0.0)));
        }
    }
    out
}

fn best_of(problem: &AlphaProblem<'_>, candidates: &[FrameWeights]) -> Result<Option<(FrameWeights, f64)>> {
    let mut best: Option<(FrameWeights, f64)> = None;
    for alpha in candidates {
        let value = match problem.objective(alpha) {
            Ok(v) => v,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        match best {
            // Earlier candidates win ties, which encodes the tie-break order.
            Some((_, b)) if value >= b - problem.tie_tolerance(value, b) => {}
            _ => best = Some((*alpha, value)),
        }
    }
    Ok(best)
}

/// Grid search over the alpha simplex followed by one local refinement pass.
pub fn optimize_alphas(problem: &AlphaProblem<'_>) -> Result<FrameWeights> {
    let (coarse, _) = best_of(problem, &coarse_candidates())?.ok_or_else(|| {
        Error::Degenerate("every alpha candidate produced a degenerate problem".into())
    })?;
    let (fine, _) = best_of(problem, &refine_candidates(&coarse))?
        .expect("the refinement window contains the coarse optimum");
    Ok(fine)
}

/// `(lambda, mu)` from the current map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub lambda: f64,
    pub mu: f64,
}

/// Sets `lambda = lambda0 * (u_X + u_T + u_L) / |E y|^2` and likewise `mu`
/// with `R`. A vanishing denominator keeps `previous` (or `lambda0`/`mu0`
/// when there is none).
pub fn compute_smoothing(
    y: &DMatrix<f64>,
    set: &DemonstrationSet,
    cl: &Clustering,
    w: [f64; 3],
    lambda0: f64,
    mu0: f64,
    previous: Option<Smoothing>,
) -> Result<Smoothing> {
    for (name, v) in [("lambda0", lambda0), ("mu0", mu0)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let mut approx = 0.0;
    for (k, frame) in Frame::ALL.into_iter().enumerate() {
        if w[k] != 0.0 {
            approx += w[k] * approximation_cost(y, set.data(frame), cl, frame)?;
        }
    }
    let floor = 1e-24 * y.norm_squared();
    let edge = regularizer_cost(y, MatrixKind::Edge)?;
    let rib = regularizer_cost(y, MatrixKind::Rib)?;
    let lambda = if edge > floor {
        lambda0 * approx / edge
    } else {
        previous.map_or(lambda0, |s| s.lambda)
    };
    let mu = if rib > floor {
        mu0 * approx / rib
    } else {
        previous.map_or(mu0, |s| s.mu)
    };
    Ok(Smoothing { lambda, mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{assign, per_demo_clusterings};
    use crate::coordinates::Trajectory;
    use crate::dataset::{resample_points, synth_demos, Shape};

    #[test]
    fn coarse_grid_layout() {
        let c = coarse_candidates();
        assert_eq!(c.len(), 232);
        assert_eq!(c[0], FrameWeights::new(1.0, 0.0, 0.0));
        assert!(c.contains(&FrameWeights::UNIFORM));
        for a in &c {
            assert!((a.sum() - 1.0).abs() < 1e-12);
        }
        for pair in c.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            assert!((p.cartesian, p.tangent) > (q.cartesian, q.tangent));
        }
    }

    #[test]
    fn refine_window() {
        assert_eq!(refine_candidates(&FrameWeights::new(0.5, 0.25, 0.25)).len(), 25);
        let corner = refine_candidates(&FrameWeights::new(1.0, 0.0, 0.0));
        // alpha_X in {0.98, 0.99, 1.0} with alpha_T <= 1 - alpha_X.
        assert_eq!(corner.len(), 6);
        assert_eq!(corner[0], FrameWeights::new(1.0, 0.0, 0.0));
    }

    fn zero_demo_set() -> (DemonstrationSet, Clustering) {
        let demo = Trajectory::from_rows(&[vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        let set = DemonstrationSet::new(vec![demo], None).unwrap();
        (set, Clustering::from_assignment(vec![0, 1, 2], 3).unwrap())
    }

    #[test]
    fn equal_costs_uniform_betas() {
        // Residual (-1, 0, 1) costs 2 in every frame.
        let (set, cl) = zero_demo_set();
        let y = nalgebra::dmatrix![-1.0; 0.0; 1.0];
        let costs = frame_costs(&y, &set, std::slice::from_ref(&cl)).unwrap();
        assert_eq!(costs, [2.0, 2.0, 2.0]);
        let betas = compute_betas(&y, &set, &[cl]).unwrap();
        for b in betas.as_array() {
            assert!((b - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_fit_betas_fall_back() {
        let set = DemonstrationSet::new(synth_demos(Shape::Arc, 1, 0.0, 0), Some(20)).unwrap();
        let y = set.data(Frame::Cartesian).clone();
        let per = per_demo_clusterings(&set, &y).unwrap();
        assert_eq!(compute_betas(&y, &set, &per).unwrap(), FrameWeights::UNIFORM);
    }

    #[test]
    fn betas_on_simplex_and_scale_free() {
        let set = DemonstrationSet::new(synth_demos(Shape::SCurve, 3, 0.05, 2), None).unwrap();
        let y = resample_points(&set.mean_demo(), 25);
        let per = per_demo_clusterings(&set, &y).unwrap();
        let b = compute_betas(&y, &set, &per).unwrap();
        assert!((b.sum() - 1.0).abs() < 1e-12);

        let s = 3.5;
        let scaled: Vec<_> = set
            .demos()
            .iter()
            .map(|t| Trajectory::new(t.points() * s).unwrap())
            .collect();
        let scaled = DemonstrationSet::new(scaled, None).unwrap();
        let ys = &y * s;
        let per_s = per_demo_clusterings(&scaled, &ys).unwrap();
        let bs = compute_betas(&ys, &scaled, &per_s).unwrap();
        for (u, v) in b.as_array().iter().zip(bs.as_array()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_direct_substitution() {
        let (set, cl) = zero_demo_set();
        // u_X = 4 * |y|^2 = 4, |Ey|^2 = 2, |Ry|^2 = 4.
        let y = nalgebra::dmatrix![0.0; 1.0; 0.0];
        let s = compute_smoothing(&y, &set, &cl, [4.0, 0.0, 0.0], 1.5, 1.5, None).unwrap();
        assert_eq!(s.lambda, 3.0);
        assert_eq!(s.mu, 1.5);
    }

    #[test]
    fn smoothing_fallbacks() {
        let set = DemonstrationSet::new(synth_demos(Shape::Line, 1, 0.0, 0), Some(10)).unwrap();
        let y = DMatrix::from_fn(10, 2, |i, j| i as f64 * (1.0 + j as f64));
        let cl = assign(set.data(Frame::Cartesian), &y).unwrap();
        let s = compute_smoothing(&y, &set, &cl, [1.0, 0.0, 0.0], 1.5, 2.5, None).unwrap();
        assert_eq!(s.mu, 2.5);
        let prev = Smoothing { lambda: 9.0, mu: 0.7 };
        let s = compute_smoothing(&y, &set, &cl, [1.0, 0.0, 0.0], 1.5, 2.5, Some(prev)).unwrap();
        assert_eq!(s.mu, 0.7);
        assert!(compute_smoothing(&y, &set, &cl, [1.0, 0.0, 0.0], 0.0, 2.5, None).is_err());
    }

    #[test]
    fn flat_objective_prefers_cartesian_corner() {
        let set = DemonstrationSet::new(synth_demos(Shape::SCurve, 1, 0.0, 0), Some(12)).unwrap();
        let y = set.data(Frame::Cartesian).clone();
        let cl = assign(&y, &y).unwrap();
        let per = per_demo_clusterings(&set, &y).unwrap();
        let cons = [
            PointConstraint::new(0, set.demos()[0].point(0)),
            PointConstraint::new(11, set.demos()[0].point(11)),
        ];
        let problem = AlphaProblem {
            set: &set,
            clustering: &cl,
            per_demo: &per,
            constraints: &cons,
            beta: FrameWeights::UNIFORM,
            lambda: 1e-14,
            mu: 1e-14,
        };
        let alpha = optimize_alphas(&problem).unwrap();
        assert_eq!(alpha, FrameWeights::new(1.0, 0.0, 0.0));
    }
}
