//! Similarity and smoothness metrics for comparing reproductions with
//! demonstrations. Lower is better for all of them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coordinates::Trajectory;
use crate::dataset::resample_points;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub frechet: f64,
    pub sse: f64,
    pub angular: f64,
    pub jerk: f64,
}

impl MetricsReport {
    pub const NAMES: [&'static str; 4] = ["frechet", "sse", "angular", "jerk"];

    pub fn as_array(&self) -> [f64; 4] {
        [self.frechet, self.sse, self.angular, self.jerk]
    }

    /// Each metric of `repro` against every demo, averaged over demos. Jerk
    /// is that of the reproduction alone.
    pub fn against_set(repro: &Trajectory, demos: &[Trajectory]) -> Result<Self> {
        if demos.is_empty() {
            return Err(Error::Size("no demonstrations to compare against".into()));
        }
        let n = demos.len() as f64;
        let mut report = MetricsReport { jerk: jerk(repro)?, ..Default::default() };
        for demo in demos {
            report.frechet += frechet(repro, demo)? / n;
            report.sse += sse(repro, demo)? / n;
            report.angular += angular_similarity(repro, demo)? / n;
        }
        Ok(report)
    }
}

fn check_dims(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "trajectories have dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Discrete Fréchet distance under Euclidean point distance.
pub fn frechet(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_dims(a, b)?;
    let (pa, pb) = (a.points(), b.points());
    let (n, m) = (pa.nrows(), pb.nrows());
    let dist = |i: usize, j: usize| (pa.row(i) - pb.row(j)).norm();
    // Rolling row of the coupling table.
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for i in 0..n {
        for j in 0..m {
            let d = dist(i, j);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

fn common_length(a: &Trajectory, b: &Trajectory) -> (DMatrix<f64>, DMatrix<f64>) {
    let len = a.len().max(b.len());
    (resample_points(a.points(), len), resample_points(b.points(), len))
}

/// Sum of squared pointwise errors after resampling both curves to the
/// longer length.
pub fn sse(repro: &Trajectory, demo: &Trajectory) -> Result<f64> {
    check_dims(repro, demo)?;
    let (r, d) = common_length(repro, demo);
    Ok((r - d).norm_squared())
}

/// Mean over segments of `(1 - cos theta) / 2`, where `theta` is the angle
/// between corresponding segment vectors. A zero-length segment against a
/// non-zero one scores 0.5; two zero-length segments score 0.
pub fn angular_similarity(repro: &Trajectory, demo: &Trajectory) -> Result<f64> {
    check_dims(repro, demo)?;
    let (r, d) = common_length(repro, demo);
    let segments = r.nrows() - 1;
    let mut total = 0.0;
    for t in 0..segments {
        let u = r.row(t + 1) - r.row(t);
        let v = d.row(t + 1) - d.row(t);
        let (nu, nv) = (u.norm(), v.norm());
        total += match (nu == 0.0, nv == 0.0) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 0.5,
            (false, false) => {
                let cos = (u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0);
                (1.0 - cos) / 2.0
            }
        };
    }
    Ok(total / segments as f64)
}

/// Sum of squared third differences with unit time step.
pub fn jerk(traj: &Trajectory) -> Result<f64> {
    let p = traj.points();
    if p.nrows() < 4 {
        return Err(Error::Size(format!("jerk needs at least 4 points, got {}", p.nrows())));
    }
    Ok((0..p.nrows() - 3)
        .map(|t| (p.row(t + 3) - p.row(t + 2) * 3.0 + p.row(t + 1) * 3.0 - p.row(t)).norm_squared())
        .sum())
}
