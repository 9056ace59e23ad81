//! Differential-coordinate and regularizer matrices.
//!
//! All four matrices are banded with at most three non-zeros per row, so they
//! are stored as per-row stencils. [`DifferentialMatrix::to_dense`] gives the
//! dense equivalent for tests and small problems.

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixKind {
    /// Square, zero first row, then first differences `(-1, 1)`.
    Tangent,
    /// Square, `1/2 * (1, -2, 1)` interior rows with one-sided boundary rows.
    Laplacian,
    /// `(n-1) x n` first differences.
    Edge,
    /// `(n-2) x n` second differences.
    Rib,
}

/// Coordinate space in which an approximation energy is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Cartesian,
    Tangent,
    Laplacian,
}

impl Frame {
    pub const ALL: [Frame; 3] = [Frame::Cartesian, Frame::Tangent, Frame::Laplacian];

    /// The transform matrix kind, `None` for the identity.
    pub fn matrix_kind(self) -> Option<MatrixKind> {
        match self {
            Frame::Cartesian => None,
            Frame::Tangent => Some(MatrixKind::Tangent),
            Frame::Laplacian => Some(MatrixKind::Laplacian),
        }
    }
}

/// One non-zero entry: `(column, coefficient)`.
type Entry = (usize, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialMatrix {
    kind: MatrixKind,
    n: usize,
    rows: Vec<Vec<Entry>>,
}

impl DifferentialMatrix {
    pub fn new(kind: MatrixKind, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Size(format!("{kind:?} matrix needs n >= 3, got {n}")));
        }
        let rows = match kind {
            MatrixKind::Tangent => std::iter::once(Vec::new())
                .chain((1..n).map(|i| vec![(i - 1, -1.0), (i, 1.0)]))
                .collect(),
            MatrixKind::Laplacian => {
                let mut rows = Vec::with_capacity(n);
                rows.push(vec![(0, -1.0), (1, 1.0)]);
                for i in 1..n - 1 {
                    rows.push(vec![(i - 1, 0.5), (i, -1.0), (i + 1, 0.5)]);
                }
                rows.push(vec![(n - 2, 1.0), (n - 1, -1.0)]);
                rows
            }
            MatrixKind::Edge => (0..n - 1).map(|i| vec![(i, -1.0), (i + 1, 1.0)]).collect(),
            MatrixKind::Rib => (0..n - 2)
                .map(|i| vec![(i, 1.0), (i + 1, -2.0), (i + 2, 1.0)])
                .collect(),
        };
        Ok(Self { kind, n, rows })
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Number of columns (source points).
    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Non-zero entries of row `i` as `(column, coefficient)` pairs.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(_, v)| v).sum()).collect()
    }

    /// Product with a point matrix (`n x d`), giving `nrows x d`.
    pub fn apply(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if points.nrows() != self.n {
            return Err(Error::Dimension(format!(
                "{:?} matrix has {} columns but input has {} rows",
                self.kind,
                self.n,
                points.nrows()
            )));
        }
        let d = points.ncols();
        let mut out = DMatrix::zeros(self.nrows(), d);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                for c in 0..d {
                    out[(i, c)] += v * points[(j, c)];
                }
            }
        }
        Ok(out)
    }
}

/// An ordered sequence of `d`-dimensional points with uniform time indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: DMatrix<f64>,
}

impl Trajectory {
    /// Wraps a `len x d` matrix; requires at least three rows, one column and
    /// finite entries.
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() < 3 {
            return Err(Error::Size(format!(
                "trajectory needs at least 3 points, got {}",
                points.nrows()
            )));
        }
        if points.ncols() == 0 {
            return Err(Error::Dimension("trajectory has zero dimensions".into()));
        }
        if let Some(idx) = points.iter().position(|v| !v.is_finite()) {
            let (r, c) = (idx % points.nrows(), idx / points.nrows());
            return Err(Error::Format(format!("non-finite value at point {r}, coordinate {c}")));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Dimension(format!(
                "point {bad} has {} coordinates, expected {d}",
                rows[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn into_points(self) -> DMatrix<f64> {
        self.points
    }

    pub fn point(&self, i: usize) -> RowDVector<f64> {
        self.points.row(i).into_owned()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Maps a trajectory into the given coordinate frame. The output has the
/// same shape as the input.
pub fn transform(traj: &Trajectory, frame: Frame) -> Trajectory {
    match frame.matrix_kind() {
        None => traj.clone(),
        Some(kind) => {
            // `len >= 3` holds for every trajectory, so construction cannot fail.
            let m = DifferentialMatrix::new(kind, traj.len()).expect("trajectory has >= 3 points");
            let points = m.apply(traj.points()).expect("size-matched matrix");
            Trajectory { points }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn tangent_3() {
        let t = DifferentialMatrix::new(MatrixKind::Tangent, 3).unwrap().to_dense();
        assert_eq!(t, dmatrix![0.0, 0.0, 0.0; -1.0, 1.0, 0.0; 0.0, -1.0, 1.0]);
    }

    #[test]
    fn laplacian_3() {
        let l = DifferentialMatrix::new(MatrixKind::Laplacian, 3).unwrap().to_dense();
        let expected = dmatrix![-2.0, 2.0, 0.0; 1.0, -2.0, 1.0; 0.0, 2.0, -2.0] * 0.5;
        assert_eq!(l, expected);
    }

    #[test]
    fn rib_4() {
        let r = DifferentialMatrix::new(MatrixKind::Rib, 4).unwrap().to_dense();
        assert_eq!(r, dmatrix![1.0, -2.0, 1.0, 0.0; 0.0, 1.0, -2.0, 1.0]);
    }

    #[test]
    fn shapes() {
        for n in [3, 5, 17] {
            assert_eq!(DifferentialMatrix::new(MatrixKind::Tangent, n).unwrap().nrows(), n);
            assert_eq!(DifferentialMatrix::new(MatrixKind::Laplacian, n).unwrap().nrows(), n);
            assert_eq!(DifferentialMatrix::new(MatrixKind::Edge, n).unwrap().nrows(), n - 1);
            assert_eq!(DifferentialMatrix::new(MatrixKind::Rib, n).unwrap().nrows(), n - 2);
        }
    }

    #[test]
    fn too_small() {
        for kind in [MatrixKind::Tangent, MatrixKind::Laplacian, MatrixKind::Edge, MatrixKind::Rib] {
            assert!(matches!(DifferentialMatrix::new(kind, 2), Err(Error::Size(_))));
        }
    }

    #[test]
    fn edge_is_tangent_without_first_row() {
        let n = 7;
        let e = DifferentialMatrix::new(MatrixKind::Edge, n).unwrap().to_dense();
        let t = DifferentialMatrix::new(MatrixKind::Tangent, n).unwrap().to_dense();
        assert_eq!(e, t.rows(1, n - 1).into_owned());
    }

    #[test]
    fn transform_examples() {
        let c = Trajectory::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(transform(&c, Frame::Tangent).points(), &DMatrix::zeros(3, 2));

        let line = Trajectory::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(transform(&line, Frame::Laplacian).points(), &dmatrix![1.0; 0.0; -1.0]);

        let t = Trajectory::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(transform(&t, Frame::Tangent).points(), &dmatrix![0.0; 1.0; 2.0]);
    }

    #[test]
    fn trajectory_validation() {
        assert!(matches!(
            Trajectory::from_rows(&[vec![0.0], vec![2.0]]),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            Trajectory::from_rows(&[vec![0.0], vec![f64::NAN], vec![1.0]]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            Trajectory::from_rows(&[vec![0.0], vec![1.0, 2.0], vec![1.0]]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn apply_checks_size() {
        let m = DifferentialMatrix::new(MatrixKind::Edge, 4).unwrap();
        assert!(m.apply(&DMatrix::zeros(5, 2)).is_err());
    }
}
