// SPDX-License-Identifier: MIT OR Apache-2.0

//! Time-varying graphical lasso and the covariance-change score.
//!
//! The series is cut into consecutive slices, each slice yields an
//! empirical covariance, and [`tvgl_solve`] estimates one sparse precision
//! matrix per slice with a squared-Frobenius penalty tying neighbours
//! together. [`cov_score`] then measures how much adjacent precision
//! matrices differ.

mod admm;
mod score;
mod slices;

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use admm::{objective, tvgl_solve, TvglSolution};
pub use score::{
    cov_score, cov_score_aligned, pair_change_heatmap, partial_correlation, slice_scores,
    PairChangeHeatmap,
    ScoreAlignment,
};
pub use slices::{
    slice_covariances, slice_covariances_strided, slice_ranges, strided_ranges, CovSlice,
    SliceEstimator,
};

use crate::error::TvglError;

/// Solver and slicing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvglConfig {
    /// Off-diagonal L1 weight.
    pub lambda: f64,
    /// Weight of the squared Frobenius penalty between neighbouring slices.
    pub beta: f64,
    pub slice_size: usize,
    /// Offset between consecutive slice starts; `None` means
    /// `slice_size`, i.e. non-overlapping slices.
    pub slice_stride: Option<usize>,
    pub estimator: SliceEstimator,
    pub score_alignment: ScoreAlignment,
    pub admm_rho: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
}

impl Default for TvglConfig {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            beta: 10.0,
            slice_size: 10,
            slice_stride: Some(2),
            estimator: SliceEstimator::default(),
            score_alignment: ScoreAlignment::default(),
            admm_rho: 1.0,
            max_iters: 500,
            primal_tol: 1e-5,
            dual_tol: 1e-5,
        }
    }
}

impl TvglConfig {
    pub fn validate(&self) -> Result<(), TvglError> {
        let bad = |m: &str| Err(TvglError::InvalidConfig(m.to_string()));
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.admm_rho > 0.0) {
            return bad("admm_rho must be positive");
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        Ok(())
    }
}

/// One precision matrix per slice, with the time range each covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSequence {
    #[serde(with = "crate::matrix_serde::seq")]
    pub matrices: Vec<DMatrix<f64>>,
    pub slice_ranges: Vec<Range<usize>>,
}

impl PrecisionSequence {
    pub fn new(matrices: Vec<DMatrix<f64>>, slice_ranges: Vec<Range<usize>>) -> Self {
        assert_eq!(matrices.len(), slice_ranges.len());
        Self {
            matrices,
            slice_ranges,
        }
    }

    /// Convenience for tests and callers that only care about slice order:
    /// slice `k` covers time index `k`.
    pub fn unit_slices(matrices: Vec<DMatrix<f64>>) -> Self {
        let ranges = (0..matrices.len()).map(|k| k..k + 1).collect();
        Self::new(matrices, ranges)
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, DMatrix::nrows)
    }

    /// Length of the time axis covered by the slices.
    pub fn time_len(&self) -> usize {
        self.slice_ranges.last().map_or(0, |r| r.end)
    }

    /// Slice index covering time `t`.
    pub fn slice_of(&self, t: usize) -> Option<usize> {
        self.slice_ranges.iter().position(|r| r.contains(&t))
    }
}

/// Runs slicing, the solver and scoring in one go.
pub fn estimate(
    x: &crate::series::TimeSeries,
    config: &TvglConfig,
) -> Result<(TvglSolution, crate::series::ScoreSeries), TvglError> {
    let stride = config.slice_stride.unwrap_or(config.slice_size);
    let slices = slice_covariances_strided(x, config.slice_size, stride, config.estimator)?;
    let covs: Vec<DMatrix<f64>> = slices.iter().map(|s| s.cov.clone()).collect();
    let ranges = slices.into_iter().map(|s| s.range).collect();
    let mut solution = tvgl_solve(&covs, config)?;
    solution.precision.slice_ranges = ranges;
    let score = cov_score_aligned(&solution.precision, config.score_alignment);
    Ok((solution, score))
}
