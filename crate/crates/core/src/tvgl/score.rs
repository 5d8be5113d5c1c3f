// SPDX-License-Identifier: MIT OR Apache-2.0

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::PrecisionSequence;
use crate::error::TvglError;
use crate::series::ScoreSeries;

/// `-P(i,j) / sqrt(P(i,i) P(j,j))`, clamped to `[-1, 1]` against rounding.
pub fn partial_correlation(p: &DMatrix<f64>, i: usize, j: usize) -> Result<f64, TvglError> {
    let d = p.nrows();
    if i >= d || j >= d {
        return Err(TvglError::IndexOutOfRange { i, j, d });
    }
    if i == j {
        return Err(TvglError::DiagonalRequest(i));
    }
    let denom = (p[(i, i)] * p[(j, j)]).sqrt();
    Ok((-p[(i, j)] / denom).clamp(-1.0, 1.0))
}

/// Entrywise `|P_{k-1}| - |P_k|` for each slice `k >= 1`: negative entries
/// mark a pair whose absolute precision (and partial correlation) grew.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChangeHeatmap {
    pub feature_names: Vec<String>,
    /// Slice ranges; entry `k` of `changes` belongs to `slice_ranges[k + 1]`.
    pub slice_ranges: Vec<Range<usize>>,
    #[serde(with = "crate::matrix_serde::seq")]
    pub changes: Vec<DMatrix<f64>>,
}

impl PairChangeHeatmap {
    /// Slice-level change magnitude, equal to the CovScore of slice `k + 1`.
    pub fn magnitude(&self, k: usize) -> f64 {
        self.changes[k].iter().map(|v| v.abs()).sum()
    }

    /// The off-diagonal pair with the largest change at entry `k`, with the
    /// signed heatmap value.
    pub fn top_pair(&self, k: usize) -> Option<(usize, usize, f64)> {
        let m = &self.changes[k];
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                let v = m[(i, j)];
                if best.is_none_or(|(_, _, b)| v.abs() > b.abs()) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    }
}

fn abs_change(prev: &DMatrix<f64>, next: &DMatrix<f64>) -> DMatrix<f64> {
    prev.zip_map(next, |a, b| a.abs() - b.abs())
}

pub fn pair_change_heatmap(p: &PrecisionSequence, feature_names: &[String]) -> PairChangeHeatmap {
    let changes = p
        .matrices
        .windows(2)
        .map(|w| abs_change(&w[0], &w[1]))
        .collect();
    PairChangeHeatmap {
        feature_names: feature_names.to_vec(),
        slice_ranges: p.slice_ranges.clone(),
        changes,
    }
}

/// Per-slice sum over every matrix entry (diagonal included) of
/// `| |P_k| - |P_{k-1}| |`, broadcast to all time indices of slice `k`.
/// Slice 0 scores 0.
pub fn slice_scores(p: &PrecisionSequence) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(
            p.matrices
                .windows(2)
                .map(|w| abs_change(&w[0], &w[1]).iter().map(|v| v.abs()).sum()),
        )
        .take(p.len())
        .collect()
}

pub fn cov_score(p: &PrecisionSequence) -> ScoreSeries {
    cov_score_aligned(p, ScoreAlignment::Slice)
}

/// Where the score of the transition from slice `k - 1` to slice `k` is
/// placed on the time axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreAlignment {
    /// Every index of slice `k`.
    Slice,
    /// From the midpoint of slice `k - 1` up to the midpoint of slice `k`.
    #[default]
    Boundary,
}

pub fn cov_score_aligned(p: &PrecisionSequence, alignment: ScoreAlignment) -> ScoreSeries {
    let per_slice = slice_scores(p);
    let mut scores = vec![0.0; p.time_len()];
    let mid = |r: &Range<usize>| (r.start + r.end) / 2;
    for (k, s) in per_slice.iter().enumerate().skip(1) {
        let span = match alignment {
            ScoreAlignment::Slice => p.slice_ranges[k].clone(),
            ScoreAlignment::Boundary => mid(&p.slice_ranges[k - 1])..mid(&p.slice_ranges[k]),
        };
        scores[span].fill(*s);
    }
    ScoreSeries {
        label: "CovScore".into(),
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(d: usize, s: f64) -> DMatrix<f64> {
        DMatrix::identity(d, d) * s
    }

    #[test]
    fn partial_correlation_cases() {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 4.0]));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(partial_correlation(&diag, i, j).unwrap(), 0.0);
        }
        // -(-1) / sqrt(2 * 2)
        let p = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!((partial_correlation(&p, 0, 1).unwrap() - 0.5).abs() < 1e-15);
        // bivariate rho = 0.8: inverse of [[1, .8], [.8, 1]] is [[1, -.8], [-.8, 1]] / 0.36
        let inv = DMatrix::from_row_slice(2, 2, &[1.0, -0.8, -0.8, 1.0]) / 0.36;
        assert!((partial_correlation(&inv, 0, 1).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(partial_correlation(&p, 1, 1), Err(TvglError::DiagonalRequest(1)));
        assert!(matches!(
            partial_correlation(&p, 0, 2),
            Err(TvglError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn cov_score_cases() {
        let same = PrecisionSequence::unit_slices(vec![eye(3, 1.0), eye(3, 1.0)]);
        assert_eq!(cov_score(&same).scores, vec![0.0, 0.0]);
        let grow = PrecisionSequence::unit_slices(vec![eye(3, 1.0), eye(3, 2.0)]);
        assert_eq!(cov_score(&grow).scores, vec![0.0, 3.0]);
    }

    #[test]
    fn score_is_broadcast_over_slices() {
        let p = PrecisionSequence::new(vec![eye(2, 1.0), eye(2, 1.5), eye(2, 1.5)], vec![0..3, 3..5, 5..9]);
        assert_eq!(cov_score(&p).scores, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let centred = cov_score_aligned(&p, ScoreAlignment::Boundary);
        assert_eq!(centred.scores, vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn heatmap_sign_convention() {
        let mut a = eye(2, 1.0);
        let mut b = eye(2, 1.0);
        a[(0, 1)] = 0.0;
        a[(1, 0)] = 0.0;
        b[(0, 1)] = -0.5;
        b[(1, 0)] = -0.5;
        let p = PrecisionSequence::unit_slices(vec![a.clone(), b, a]);
        let h = pair_change_heatmap(&p, &["u".into(), "v".into()]);
        assert_eq!(h.changes[0][(0, 1)], -0.5);
        assert_eq!(h.changes[0][(1, 0)], -0.5);
        assert_eq!(h.changes[1][(0, 1)], 0.5);
        assert_eq!(h.top_pair(0), Some((0, 1, -0.5)));
        let same = PrecisionSequence::unit_slices(vec![eye(3, 1.0), eye(3, 1.0)]);
        assert!(pair_change_heatmap(&same, &[]).changes[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn heatmap_magnitude_matches_score() {
        let m = |v: f64| DMatrix::from_row_slice(2, 2, &[1.0 + v, -v, -v, 1.0]);
        let p = PrecisionSequence::unit_slices(vec![m(0.1), m(0.7), m(-0.3), m(0.2)]);
        let h = pair_change_heatmap(&p, &[]);
        let s = cov_score(&p).scores;
        for k in 0..h.changes.len() {
            assert_eq!(h.magnitude(k), s[k + 1]);
        }
        assert_eq!(s[0], 0.0);
    }
}
