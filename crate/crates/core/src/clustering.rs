//! Expectation step: nearest-node assignment of data points.

use nalgebra::DMatrix;

use crate::dataset::DemonstrationSet;
use crate::coordinates::Frame;
use crate::{Error, Result};

/// Assignment of every data point to exactly one node.
///
/// The clustering matrix `K` (`M x |g|`, one 1 per column) and the diagonal
/// weighting matrix `W` (`W_ii = sum_j K_ij`) are kept implicit; use
/// [`Clustering::k_matrix`] and [`Clustering::w_matrix`] for dense forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<usize>,
    counts: Vec<usize>,
}

impl Clustering {
    /// Builds a clustering from an explicit assignment (0-based node indices).
    pub fn from_assignment(assignment: Vec<usize>, nodes: usize) -> Result<Self> {
        let mut counts = vec![0; nodes];
        for (i, &a) in assignment.iter().enumerate() {
            if a >= nodes {
                return Err(Error::InvalidParameter(format!(
                    "data point {i} assigned to node {a}, but there are only {nodes} nodes"
                )));
            }
            counts[a] += 1;
        }
        Ok(Self { assignment, counts })
    }

    /// Owning node of each data point.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Diagonal of `W`: number of data points per node.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_nodes(&self) -> usize {
        self.counts.len()
    }

    pub fn num_points(&self) -> usize {
        self.assignment.len()
    }

    pub fn empty_clusters(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    pub fn k_matrix(&self) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.num_nodes(), self.num_points());
        for (j, &i) in self.assignment.iter().enumerate() {
            k[(i, j)] = 1.0;
        }
        k
    }

    pub fn w_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.num_nodes(),
            self.counts.iter().map(|&c| c as f64),
        ))
    }

    /// `K * data`: per-node sums of the assigned data rows.
    pub fn cluster_sums(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if data.nrows() != self.num_points() {
            return Err(Error::Dimension(format!(
                "clustering covers {} points, data has {} rows",
                self.num_points(),
                data.nrows()
            )));
        }
        let mut sums = DMatrix::zeros(self.num_nodes(), data.ncols());
        for (j, &i) in self.assignment.iter().enumerate() {
            for c in 0..data.ncols() {
                sums[(i, c)] += data[(j, c)];
            }
        }
        Ok(sums)
    }
}

/// Assigns each row of `data` to its Euclidean-nearest row of `nodes`.
/// Ties go to the lowest node index.
pub fn assign(data: &DMatrix<f64>, nodes: &DMatrix<f64>) -> Result<Clustering> {
    if data.ncols() != nodes.ncols() {
        return Err(Error::Dimension(format!(
            "data has dimension {}, nodes have {}",
            data.ncols(),
            nodes.ncols()
        )));
    }
    let m = nodes.nrows();
    if m < 2 {
        return Err(Error::Size(format!("need at least 2 nodes, got {m}")));
    }
    let d = data.ncols();
    let assignment = (0..data.nrows())
        .map(|j| {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for i in 0..m {
                let dist: f64 = (0..d).map(|c| (data[(j, c)] - nodes[(i, c)]).powi(2)).sum();
                if dist < best_dist {
                    best = i;
                    best_dist = dist;
                }
            }
            best
        })
        .collect();
    Clustering::from_assignment(assignment, m)
}

/// One clustering per demonstration, each over that demo's points only.
pub fn per_demo_clusterings(set: &DemonstrationSet, nodes: &DMatrix<f64>) -> Result<Vec<Clustering>> {
    set.frame_demos(Frame::Cartesian)
        .iter()
        .map(|demo| assign(demo.points(), nodes))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_demos, Shape};
    use nalgebra::dmatrix;

    #[test]
    fn identity_case() {
        let y = dmatrix![0.0, 0.0; 1.0, 0.0; 2.0, 1.0; 3.0, 3.0];
        let cl = assign(&y, &y).unwrap();
        assert_eq!(cl.assignment(), &[0, 1, 2, 3]);
        assert_eq!(cl.w_matrix(), DMatrix::identity(4, 4));
    }

    #[test]
    fn hand_computed() {
        let cl = assign(&dmatrix![0.0; 10.0], &dmatrix![1.0; 9.0]).unwrap();
        assert_eq!(cl.assignment(), &[0, 1]);
        assert_eq!(cl.counts(), &[1, 1]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let y = dmatrix![0.0; 1.0; 3.0; 10.0];
        let cl = assign(&dmatrix![2.0], &y).unwrap();
        assert_eq!(cl.assignment(), &[1]);
    }

    #[test]
    fn errors() {
        assert!(matches!(assign(&dmatrix![0.0, 1.0], &dmatrix![0.0; 1.0]), Err(Error::Dimension(_))));
        assert!(matches!(assign(&dmatrix![0.0], &dmatrix![0.0]), Err(Error::Size(_))));
    }

    #[test]
    fn k_and_w_consistent() {
        let set = DemonstrationSet::new(synth_demos(Shape::Arc, 2, 0.1, 3), None).unwrap();
        let y = crate::dataset::resample_points(&set.mean_demo(), 12);
        let cl = assign(set.data(Frame::Cartesian), &y).unwrap();
        let k = cl.k_matrix();
        for j in 0..k.ncols() {
            assert_eq!(k.column(j).sum(), 1.0);
        }
        let w = cl.w_matrix();
        for i in 0..12 {
            assert_eq!(w[(i, i)], k.row(i).sum());
        }
        assert_eq!(w.trace(), cl.num_points() as f64);
        let sums = cl.cluster_sums(set.data(Frame::Cartesian)).unwrap();
        assert!((sums - &k * set.data(Frame::Cartesian)).norm() < 1e-12);
    }

    #[test]
    fn per_demo_stacks_to_full() {
        let set = DemonstrationSet::new(synth_demos(Shape::SCurve, 3, 0.05, 11), None).unwrap();
        let y = crate::dataset::resample_points(&set.mean_demo(), 20);
        let full = assign(set.data(Frame::Cartesian), &y).unwrap();
        let parts = per_demo_clusterings(&set, &y).unwrap();
        let stacked: Vec<usize> = parts.iter().flat_map(|c| c.assignment().iter().copied()).collect();
        assert_eq!(stacked, full.assignment());
        assert_eq!(parts[0].num_points(), set.demo_len());
    }

    #[test]
    fn identical_demos_cluster_identically() {
        let demos = synth_demos(Shape::Arc, 2, 0.0, 0);
        let set = DemonstrationSet::new(demos, None).unwrap();
        let y = crate::dataset::resample_points(&set.mean_demo(), 9);
        let parts = per_demo_clusterings(&set, &y).unwrap();
        assert_eq!(parts[0], parts[1]);
        let single = DemonstrationSet::new(vec![set.demos()[0].clone()], None).unwrap();
        let one = per_demo_clusterings(&single, &y).unwrap();
        assert_eq!(one[0], assign(single.data(Frame::Cartesian), &y).unwrap());
    }
}
