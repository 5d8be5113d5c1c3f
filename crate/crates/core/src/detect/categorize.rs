// SPDX-License-Identifier: MIT OR Apache-2.0

//! Attributing each change point to the branch that saw it and, for
//! covariance changes, to the feature pair whose dependence moved most.

use serde::{Deserialize, Serialize};

use super::Components;
use crate::ensemble::zscore_normalize;
use crate::series::ChangePointSet;
use crate::tvgl::partial_correlation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Covariance,
    Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Absolute partial correlation grew.
    Increase,
    Decrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChange {
    pub features: (String, String),
    /// Heatmap value `|P_prev(i,j)| - |P_next(i,j)|`.
    pub change: f64,
    pub direction: Direction,
    pub partial_correlation_before: f64,
    pub partial_correlation_after: f64,
    /// Time range of the slice after the change.
    pub slice: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpCategory {
    pub t: usize,
    pub dominant: Category,
    /// Largest z-scored CovScore within the neighbourhood of `t`.
    pub cov_strength: Option<f64>,
    /// Largest z-scored DistScore within the neighbourhood of `t`.
    pub dist_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairChange>,
}

fn local_max(z: &[f64], t: usize, radius: usize) -> f64 {
    let lo = t.saturating_sub(radius);
    let hi = (t + radius + 1).min(z.len());
    z[lo..hi].iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Compares the z-scored branch scores in `[t - radius, t + radius]`.
pub fn categorize(cps: &ChangePointSet, c: &Components, radius: usize) -> Vec<CpCategory> {
    let zc = c.cov.as_ref().map(|b| zscore_normalize(&b.score.scores));
    let zd = c.dist.as_ref().map(|b| zscore_normalize(&b.score.scores));
    cps.iter()
        .map(|t| {
            let cov_strength = zc.as_ref().map(|z| local_max(z, t, radius));
            let dist_strength = zd.as_ref().map(|z| local_max(z, t, radius));
            let dominant = match (cov_strength, dist_strength) {
                (Some(a), Some(b)) if a >= b => Category::Covariance,
                (Some(_), None) => Category::Covariance,
                _ => Category::Distribution,
            };
            let pair = match (dominant, &c.cov) {
                (Category::Covariance, Some(b)) => top_pair_near(b, t, radius),
                _ => None,
            };
            CpCategory {
                t,
                dominant,
                cov_strength,
                dist_strength,
                pair,
            }
        })
        .collect()
}

/// The slice transition with the largest magnitude among slices touching
/// the neighbourhood of `t`, and its strongest off-diagonal pair.
fn top_pair_near(b: &super::CovBranch, t: usize, radius: usize) -> Option<PairChange> {
    let h = &b.heatmap;
    let lo = t.saturating_sub(radius);
    let hi = t + radius + 1;
    let k = (1..h.slice_ranges.len())
        .filter(|&k| h.slice_ranges[k].start < hi && h.slice_ranges[k].end > lo)
        .max_by(|&a, &b| h.magnitude(a - 1).total_cmp(&h.magnitude(b - 1)).then(b.cmp(&a)))?;
    let (i, j, change) = h.top_pair(k - 1)?;
    let p = &b.solution.precision.matrices;
    let range = &h.slice_ranges[k];
    Some(PairChange {
        features: (h.feature_names[i].clone(), h.feature_names[j].clone()),
        change,
        direction: if change < 0.0 {
            Direction::Increase
        } else {
            Direction::Decrease
        },
        partial_correlation_before: partial_correlation(&p[k - 1], i, j).ok()?,
        partial_correlation_after: partial_correlation(&p[k], i, j).ok()?,
        slice: (range.start, range.end),
    })
}
