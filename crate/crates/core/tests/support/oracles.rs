//! Reference implementations used only by tests. They share no code paths
//! with the library beyond the public data types.
#![allow(dead_code)]

use mc_elmap::autotune::{AlphaProblem, FrameWeights};
use mc_elmap::clustering::Clustering;
use mc_elmap::dataset::DemonstrationSet;
use mc_elmap::solver::{EnergyParams, PointConstraint};
use mc_elmap::{Frame, Trajectory};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense `m x m` stencil built straight from the difference formulas.
pub fn dense_stencil(frame: Frame, m: usize) -> DMatrix<f64> {
    match frame {
        Frame::Cartesian => DMatrix::identity(m, m),
        Frame::Tangent => DMatrix::from_fn(m, m, |i, j| {
            if i == 0 {
                0.0
            } else if j == i {
                1.0
            } else if j + 1 == i {
                -1.0
            } else {
                0.0
            }
        }),
        Frame::Laplacian => DMatrix::from_fn(m, m, |i, j| {
            if i == 0 {
                [(0, -1.0), (1, 1.0)].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
            } else if i == m - 1 {
                [(m - 1, -1.0), (m - 2, 1.0)].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
            } else if j == i {
                -1.0
            } else if j + 1 == i || j == i + 1 {
                0.5
            } else {
                0.0
            }
        }),
    }
}

pub fn dense_edge(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m - 1, m, |i, j| if j == i { -1.0 } else if j == i + 1 { 1.0 } else { 0.0 })
}

pub fn dense_rib(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m - 2, m, |i, j| match j.wrapping_sub(i) {
        0 | 2 => 1.0,
        1 => -2.0,
        _ => 0.0,
    })
}

fn diff_data(set: &DemonstrationSet, frame: Frame) -> DMatrix<f64> {
    // Rebuild the per-frame data from the Cartesian demos.
    let len = set.demo_len();
    let d = set.dim();
    let op = dense_stencil(frame, len);
    let mut out = DMatrix::zeros(len * set.num_demos(), d);
    for (k, demo) in set.demos().iter().enumerate() {
        out.rows_mut(k * len, len).copy_from(&(&op * demo.points()));
    }
    out
}

/// Stacked least-squares system `G y ~ H` whose normal equations are those
/// of the map energy.
pub fn stacked_system(set: &DemonstrationSet, cl: &Clustering, p: &EnergyParams, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = set.dim();
    let k = cl.k_matrix();
    let w = cl.w_matrix();
    let mut blocks: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::new();
    for (frame, weight) in [(Frame::Cartesian, p.w_x), (Frame::Tangent, p.w_t), (Frame::Laplacian, p.w_l)] {
        if weight > 0.0 {
            let s = weight.sqrt();
            blocks.push((&w * dense_stencil(frame, m) * s, &k * diff_data(set, frame) * s));
        }
    }
    blocks.push((dense_edge(m) * p.lambda.sqrt(), DMatrix::zeros(m - 1, d)));
    blocks.push((dense_rib(m) * p.mu.sqrt(), DMatrix::zeros(m - 2, d)));
    let rows: usize = blocks.iter().map(|b| b.0.nrows()).sum();
    let mut g = DMatrix::zeros(rows, m);
    let mut h = DMatrix::zeros(rows, d);
    let mut r = 0;
    for (gb, hb) in blocks {
        g.rows_mut(r, gb.nrows()).copy_from(&gb);
        h.rows_mut(r, hb.nrows()).copy_from(&hb);
        r += gb.nrows();
    }
    (g, h)
}

/// Equality-constrained least squares by eliminating the pinned nodes and
/// solving the remaining full-rank problem with a Householder QR.
pub fn constrained_lsq(g: &DMatrix<f64>, h: &DMatrix<f64>, cons: &[PointConstraint]) -> DMatrix<f64> {
    let m = g.ncols();
    let d = h.ncols();
    let pinned: Vec<Option<usize>> = (0..m).map(|i| cons.iter().position(|c| c.node == i)).collect();
    let free: Vec<usize> = (0..m).filter(|&i| pinned[i].is_none()).collect();
    let mut rhs = h.clone();
    for c in cons {
        rhs -= g.column(c.node) * &c.target;
    }
    let gf = DMatrix::from_fn(g.nrows(), free.len(), |r, j| g[(r, free[j])]);
    let mut y = DMatrix::zeros(m, d);
    if !free.is_empty() {
        let qr = gf.qr();
        let qt_rhs = qr.q().transpose() * &rhs;
        let sol = qr.r().solve_upper_triangular(&qt_rhs).expect("full column rank");
        for (j, &i) in free.iter().enumerate() {
            y.set_row(i, &sol.row(j));
        }
    }
    for c in cons {
        y.set_row(c.node, &c.target);
    }
    y
}

/// Largest gradient component on the free nodes, relative to the scale of
/// the normal equations.
pub fn kkt_residual(g: &DMatrix<f64>, h: &DMatrix<f64>, y: &DMatrix<f64>, cons: &[PointConstraint]) -> f64 {
    let a = g.transpose() * g;
    let b = g.transpose() * h;
    let grad = &a * y - &b;
    let scale = b.amax().max(a.amax() * y.amax()).max(1e-300);
    let mut worst: f64 = 0.0;
    for i in 0..y.nrows() {
        if cons.iter().all(|c| c.node != i) {
            worst = worst.max(grad.row(i).amax());
        }
    }
    let violation = cons.iter().map(|c| (y.row(c.node) - &c.target).amax()).fold(0.0, f64::max);
    (worst / scale).max(violation)
}

/// Minimum over all monotone couplings of the maximum paired distance,
/// enumerating every coupling explicitly.
pub fn brute_frechet(a: &Trajectory, b: &Trajectory) -> f64 {
    fn walk(a: &DMatrix<f64>, b: &DMatrix<f64>, i: usize, j: usize, worst: f64, best: &mut f64) {
        let worst = worst.max((a.row(i) - b.row(j)).norm());
        if i + 1 == a.nrows() && j + 1 == b.nrows() {
            *best = best.min(worst);
            return;
        }
        if i + 1 < a.nrows() {
            walk(a, b, i + 1, j, worst, best);
        }
        if j + 1 < b.nrows() {
            walk(a, b, i, j + 1, worst, best);
        }
        if i + 1 < a.nrows() && j + 1 < b.nrows() {
            walk(a, b, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a.points(), b.points(), 0, 0, 0.0, &mut best);
    best
}

fn argmin_with_tiebreak(problem: &AlphaProblem<'_>, mut cands: Vec<FrameWeights>) -> Option<FrameWeights> {
    // Tie-break order: larger alpha_X first, then larger alpha_T.
    cands.sort_by(|p, q| (q.cartesian, q.tangent).partial_cmp(&(p.cartesian, p.tangent)).unwrap());
    let scored: Vec<(FrameWeights, f64)> =
        cands.into_iter().filter_map(|a| problem.objective(&a).ok().map(|v| (a, v))).collect();
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    scored.into_iter().find(|(_, v)| *v <= min + problem.tie_tolerance(*v, min)).map(|s| s.0)
}

/// Exhaustive evaluation of the 0.05 simplex lattice (plus the uniform
/// point), then of the 0.01 lattice within 0.02 of that optimum.
pub fn exhaustive_alpha(problem: &AlphaProblem<'_>) -> FrameWeights {
    let mut coarse = vec![FrameWeights::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)];
    for i in 0..=20u32 {
        for j in 0..=(20 - i) {
            coarse.push(FrameWeights::new(
                f64::from(i) * 0.05,
                f64::from(j) * 0.05,
                f64::from(20 - i - j) * 0.05,
            ));
        }
    }
    let c = argmin_with_tiebreak(problem, coarse).expect("some candidate is well-posed");
    let mut fine = Vec::new();
    for di in -2..=2 {
        for dj in -2..=2 {
            let ax = c.cartesian + f64::from(di) * 0.01;
            let at = c.tangent + f64::from(dj) * 0.01;
            let al = 1.0 - ax - at;
            if ax > -1e-12 && at > -1e-12 && al > -1e-12 {
                fine.push(FrameWeights::new(ax.max(0.0), at.max(0.0), al.max(0.0)));
            }
        }
    }
    argmin_with_tiebreak(problem, fine).expect("window contains the coarse optimum")
}

/// Random solver instance with `M <= 20`, `d <= 3`, `N <= 3`, 0-3 constraints.
pub struct SolverCase {
    pub set: DemonstrationSet,
    pub clustering: Clustering,
    pub params: EnergyParams,
    pub constraints: Vec<PointConstraint>,
    pub nodes: usize,
}

pub fn random_solver_case(seed: u64) -> SolverCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rng.random_range(3..=20);
    let d = rng.random_range(1..=3);
    let n = rng.random_range(1..=3);
    let len = rng.random_range(3..=15);
    let demos = (0..n)
        .map(|_| Trajectory::new(DMatrix::from_fn(len, d, |_, _| rng.random_range(-2.0..2.0))).unwrap())
        .collect();
    let set = DemonstrationSet::new(demos, None).unwrap();
    let assignment = (0..n * len).map(|_| rng.random_range(0..nodes)).collect();
    let clustering = Clustering::from_assignment(assignment, nodes).unwrap();
    let pick = |rng: &mut ChaCha8Rng, lo: f64| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(lo..2.0) };
    let w = [rng.random_range(0.1..2.0), pick(&mut rng, 0.01), pick(&mut rng, 0.01)];
    let params = EnergyParams::new(w, rng.random_range(0.01..1.0), rng.random_range(0.01..1.0));
    let mut free: Vec<usize> = (0..nodes).collect();
    let constraints = (0..rng.random_range(0..=3usize.min(nodes)))
        .map(|_| {
            let node = free.swap_remove(rng.random_range(0..free.len()));
            PointConstraint::new(node, nalgebra::RowDVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0)))
        })
        .collect();
    SolverCase { set, clustering, params, constraints, nodes }
}
