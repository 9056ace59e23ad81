//! Maximization step: the constrained quadratic program over node positions.
//!
//! The objective is
//!
//! ```text
//! w_X |W y - K g|^2 + w_T |W T y - K g_T|^2 + w_L |W L y - K g_L|^2
//!     + lambda |E y|^2 + mu |R y|^2
//! ```
//!
//! with Frobenius norms over all `d` columns. It is separable by column, and
//! every column shares the same normal matrix, so a single factorization
//! serves all dimensions.

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::coordinates::{DifferentialMatrix, Frame, MatrixKind};
use crate::dataset::DemonstrationSet;
use crate::{Error, Result};

/// Smallest acceptable `min pivot / max pivot` of the factorization.
const PIVOT_RATIO_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub w_x: f64,
    pub w_t: f64,
    pub w_l: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl EnergyParams {
    pub fn new(w: [f64; 3], lambda: f64, mu: f64) -> Self {
        Self { w_x: w[0], w_t: w[1], w_l: w[2], lambda, mu }
    }

    pub fn weight(&self, frame: Frame) -> f64 {
        match frame {
            Frame::Cartesian => self.w_x,
            Frame::Tangent => self.w_t,
            Frame::Laplacian => self.w_l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.w_x, self.w_t, self.w_l, self.lambda, self.mu];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "energy weights must be finite and non-negative: {self:?}"
            )));
        }
        if all.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("all energy weights are zero".into()));
        }
        Ok(())
    }
}

/// Pins node `node` (0-based) to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConstraint {
    pub node: usize,
    pub target: RowDVector<f64>,
}

impl PointConstraint {
    pub fn new(node: usize, target: RowDVector<f64>) -> Self {
        Self { node, target }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub u_x: f64,
    pub u_t: f64,
    pub u_l: f64,
    pub u_e: f64,
    pub u_r: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn approximation(&self) -> f64 {
        self.u_x + self.u_t + self.u_l
    }
}

/// Residual `W (T_c y) - K g_c` of one approximation term.
pub(crate) fn approximation_residual(
    y: &DMatrix<f64>,
    data: &DMatrix<f64>,
    cl: &Clustering,
    frame: Frame,
) -> Result<DMatrix<f64>> {
    if cl.num_nodes() != y.nrows() {
        return Err(Error::Dimension(format!(
            "clustering has {} nodes, map has {}",
            cl.num_nodes(),
            y.nrows()
        )));
    }
    if data.ncols() != y.ncols() {
        return Err(Error::Dimension(format!(
            "data has dimension {}, map has {}",
            data.ncols(),
            y.ncols()
        )));
    }
    let mapped = match frame.matrix_kind() {
        None => y.clone(),
        Some(kind) => DifferentialMatrix::new(kind, y.nrows())?.apply(y)?,
    };
    let mut res = cl.cluster_sums(data)?;
    for (i, &n) in cl.counts().iter().enumerate() {
        for c in 0..y.ncols() {
            res[(i, c)] = n as f64 * mapped[(i, c)] - res[(i, c)];
        }
    }
    Ok(res)
}

/// Unweighted squared residual of one approximation term.
pub fn approximation_cost(
    y: &DMatrix<f64>,
    data: &DMatrix<f64>,
    cl: &Clustering,
    frame: Frame,
) -> Result<f64> {
    Ok(approximation_residual(y, data, cl, frame)?.norm_squared())
}

/// `|E y|^2` or `|R y|^2`.
pub fn regularizer_cost(y: &DMatrix<f64>, kind: MatrixKind) -> Result<f64> {
    Ok(DifferentialMatrix::new(kind, y.nrows())?.apply(y)?.norm_squared())
}

pub fn energies(
    y: &DMatrix<f64>,
    set: &DemonstrationSet,
    cl: &Clustering,
    p: &EnergyParams,
) -> Result<EnergyReport> {
    if cl.num_points() != set.data(Frame::Cartesian).nrows() {
        return Err(Error::Dimension(format!(
            "clustering covers {} points, set has {}",
            cl.num_points(),
            set.data(Frame::Cartesian).nrows()
        )));
    }
    let mut u = [0.0; 3];
    for (k, frame) in Frame::ALL.into_iter().enumerate() {
        u[k] = p.weight(frame) * approximation_cost(y, set.data(frame), cl, frame)?;
    }
    let u_e = p.lambda * regularizer_cost(y, MatrixKind::Edge)?;
    let u_r = p.mu * regularizer_cost(y, MatrixKind::Rib)?;
    Ok(EnergyReport {
        u_x: u[0],
        u_t: u[1],
        u_l: u[2],
        u_e,
        u_r,
        total: u[0] + u[1] + u[2] + u_e + u_r,
    })
}

/// Normal equations `A y = B` of the unconstrained objective.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl NormalEquations {
    pub fn assemble(set: &DemonstrationSet, cl: &Clustering, p: &EnergyParams, nodes: usize) -> Result<Self> {
        p.validate()?;
        if nodes < 3 {
            return Err(Error::Size(format!("need at least 3 nodes, got {nodes}")));
        }
        if cl.num_nodes() != nodes {
            return Err(Error::Dimension(format!(
                "clustering has {} nodes, expected {nodes}",
                cl.num_nodes()
            )));
        }
        let d = set.dim();
        let mut a = DMatrix::zeros(nodes, nodes);
        let mut b = DMatrix::zeros(nodes, d);
        let counts: Vec<f64> = cl.counts().iter().map(|&c| c as f64).collect();

        for frame in Frame::ALL {
            let w = p.weight(frame);
            if w == 0.0 {
                continue;
            }
            let target = cl.cluster_sums(set.data(frame))?;
            let stencil = match frame.matrix_kind() {
                None => None,
                Some(kind) => Some(DifferentialMatrix::new(kind, nodes)?),
            };
            for i in 0..nodes {
                let n = counts[i];
                if n == 0.0 {
                    continue;
                }
                let identity_row = [(i, 1.0)];
                let row = stencil.as_ref().map_or(&identity_row[..], |s| s.row(i));
                // Row of W T_c is n * row; contributes w n^2 r^T r to A and w n r^T K g_c to B.
                for &(j, rj) in row {
                    for &(k, rk) in row {
                        a[(j, k)] += w * n * n * rj * rk;
                    }
                    for c in 0..d {
                        b[(j, c)] += w * n * rj * target[(i, c)];
                    }
                }
            }
        }

        for (kind, weight) in [(MatrixKind::Edge, p.lambda), (MatrixKind::Rib, p.mu)] {
            if weight == 0.0 {
                continue;
            }
            let m = DifferentialMatrix::new(kind, nodes)?;
            for row in m.rows() {
                for &(j, rj) in row {
                    for &(k, rk) in row {
                        a[(j, k)] += weight * rj * rk;
                    }
                }
            }
        }
        Ok(Self { a, b })
    }
}

fn validate_constraints(cons: &[PointConstraint], nodes: usize, d: usize) -> Result<()> {
    let mut seen = vec![false; nodes];
    for c in cons {
        if c.node >= nodes {
            return Err(Error::InvalidParameter(format!(
                "constraint on node {} but the map has {nodes} nodes",
                c.node
            )));
        }
        if seen[c.node] {
            return Err(Error::InvalidParameter(format!("node {} constrained twice", c.node)));
        }
        seen[c.node] = true;
        if c.target.len() != d {
            return Err(Error::Dimension(format!(
                "constraint on node {} has dimension {}, data has {d}",
                c.node,
                c.target.len()
            )));
        }
        if c.target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("constraint on node {} is not finite", c.node)));
        }
    }
    Ok(())
}

/// Exact minimizer of the energy subject to `y[node] = target` for every
/// constraint, by eliminating the pinned nodes.
pub fn solve(
    set: &DemonstrationSet,
    cl: &Clustering,
    p: &EnergyParams,
    cons: &[PointConstraint],
    nodes: usize,
) -> Result<DMatrix<f64>> {
    validate_constraints(cons, nodes, set.dim())?;
    let NormalEquations { a, b } = NormalEquations::assemble(set, cl, p, nodes)?;
    solve_constrained(&a, &b, cons).map_err(|e| match e {
        Error::Degenerate(msg) => Error::Degenerate(format!(
            "{msg} (w = [{}, {}, {}], lambda = {}, mu = {}, {} constraint(s), {} empty cluster(s) of {nodes})",
            p.w_x,
            p.w_t,
            p.w_l,
            p.lambda,
            p.mu,
            cons.len(),
            cl.empty_clusters()
        )),
        other => other,
    })
}

/// Solves the equality-constrained system for the given normal equations.
///
/// Every constraint pins one node, so the KKT system reduces exactly to the
/// free nodes: `A_FF y_F = B_F - A_FC z`. `A_FF` is symmetric positive
/// definite for a well-posed problem and is factored by Cholesky.
pub fn solve_constrained(a: &DMatrix<f64>, b: &DMatrix<f64>, cons: &[PointConstraint]) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    let d = b.ncols();
    let mut pinned = vec![None; m];
    for (k, c) in cons.iter().enumerate() {
        pinned[c.node] = Some(k);
    }
    let free: Vec<usize> = (0..m).filter(|&i| pinned[i].is_none()).collect();
    let mut y = DMatrix::zeros(m, d);
    for c in cons {
        y.set_row(c.node, &c.target);
    }
    if free.is_empty() {
        return Ok(y);
    }

    let n = free.len();
    let a_ff = DMatrix::from_fn(n, n, |r, c| a[(free[r], free[c])]);
    let mut rhs = DMatrix::from_fn(n, d, |r, k| b[(free[r], k)]);
    for c in cons {
        for (r, &i) in free.iter().enumerate() {
            let coupling = a[(i, c.node)];
            if coupling != 0.0 {
                for k in 0..d {
                    rhs[(r, k)] -= coupling * c.target[k];
                }
            }
        }
    }

    let chol = a_ff
        .cholesky()
        .ok_or_else(|| Error::Degenerate("system is not positive definite on the free nodes".into()))?;
    // Squared diagonal of L are the pivots of the equivalent LDL^T factorization.
    let pivots = chol.l_dirty().diagonal().map(|v| v * v);
    let (min_pivot, max_pivot) = (pivots.min(), pivots.max());
    if !(max_pivot > 0.0) || min_pivot <= PIVOT_RATIO_TOL * max_pivot {
        return Err(Error::Degenerate(format!(
            "system is singular (pivot ratio {:.3e})",
            if max_pivot > 0.0 { min_pivot / max_pivot } else { 0.0 }
        )));
    }
    let sol = chol.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("solution contains non-finite values".into()));
    }
    for (r, &i) in free.iter().enumerate() {
        y.set_row(i, &sol.row(r));
    }
    Ok(y)
}
