// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::DMatrixView;

use super::kernel::{sq_dist, Gaussian, RadialKernel};
use crate::error::MmdError;

/// Squared pairwise distances of the pooled sample `A ∪ B`, with `A`
/// occupying the first `n_a` positions.
#[derive(Debug, Clone)]
pub struct PooledDistances {
    n_a: usize,
    n: usize,
    sq: Vec<f64>,
}

impl PooledDistances {
    /// Windows are `d x n` with one sample per column.
    pub fn new(a: DMatrixView<'_, f64>, b: DMatrixView<'_, f64>) -> Result<Self, MmdError> {
        if a.ncols() < 2 {
            return Err(MmdError::WindowTooSmall { got: a.ncols() });
        }
        if b.ncols() < 2 {
            return Err(MmdError::WindowTooSmall { got: b.ncols() });
        }
        if a.nrows() != b.nrows() {
            return Err(MmdError::DimensionMismatch {
                a: a.nrows(),
                b: b.nrows(),
            });
        }
        let points: Vec<Vec<f64>> = a
            .column_iter()
            .chain(b.column_iter())
            .map(|c| c.iter().copied().collect())
            .collect();
        let n = points.len();
        let mut sq = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = sq_dist(&points[i], &points[j]);
                sq[i * n + j] = v;
                sq[j * n + i] = v;
            }
        }
        Ok(Self {
            n_a: a.ncols(),
            n,
            sq,
        })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n - self.n_a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Median of the `n (n - 1) / 2` pairwise Euclidean distances.
    pub fn median_distance(&self) -> f64 {
        let mut d: Vec<f64> = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d.push(self.sq[i * self.n + j].sqrt());
            }
        }
        let mid = d.len() / 2;
        let (_, upper, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
        let upper = *upper;
        if d.len() % 2 == 1 {
            upper
        } else {
            let lower = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            0.5 * (lower + upper)
        }
    }

    /// Normalised kernel matrix (row-major) at one bandwidth.
    pub fn kernel_matrix(&self, kernel: &dyn RadialKernel, bandwidth: f64) -> Vec<f64> {
        self.sq.iter().map(|&s| kernel.normalized(s, bandwidth)).collect()
    }

    /// Unbiased MMD^2 for the split given by `labels`: `labels[..n_a]` index
    /// sample A and the rest sample B.
    pub(crate) fn statistic_with(&self, k: &[f64], labels: &[usize]) -> f64 {
        let n = self.n;
        let (ia, ib) = labels.split_at(self.n_a);
        let within = |idx: &[usize]| {
            let mut s = 0.0;
            for (p, &i) in idx.iter().enumerate() {
                let row = &k[i * n..(i + 1) * n];
                for &j in &idx[p + 1..] {
                    s += row[j];
                }
            }
            let m = idx.len() as f64;
            2.0 * s / (m * (m - 1.0))
        };
        let mut cross = 0.0;
        for &i in ia {
            let row = &k[i * n..(i + 1) * n];
            for &j in ib {
                cross += row[j];
            }
        }
        let cross = cross / (ia.len() * ib.len()) as f64;
        within(ia) + within(ib) - 2.0 * cross
    }

    pub(crate) fn identity_labels(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
}

/// Unbiased MMD^2 estimate with the normalised Gaussian kernel: mean
/// off-diagonal within-A similarity plus mean off-diagonal within-B
/// similarity minus twice the mean cross similarity.
pub fn mmd_statistic(
    a: DMatrixView<'_, f64>,
    b: DMatrixView<'_, f64>,
    bandwidth: f64,
) -> Result<f64, MmdError> {
    if !(bandwidth > 0.0) {
        return Err(MmdError::NonpositiveBandwidth(bandwidth));
    }
    let pooled = PooledDistances::new(a, b)?;
    let k = pooled.kernel_matrix(&Gaussian, bandwidth);
    Ok(pooled.statistic_with(&k, &pooled.identity_labels()))
}
