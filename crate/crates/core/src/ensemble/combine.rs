// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::savgol::savgol_filter;
use super::EnsembleConfig;
use crate::error::EnsembleError;
use crate::preprocess::mean_std;
use crate::series::ScoreSeries;

pub const VARIANT_LABELS: [&str; 4] = [
    "z(DistScore)",
    "z(CovScore)",
    "SG(CovScore)",
    "SG(|SG(CovScore)|+|DistScore|)",
];

/// Zero mean, unit population variance. A constant input maps to zeros.
pub fn zscore_normalize(s: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(s);
    if std <= 1e-12 * mean.abs().max(1.0) {
        return vec![0.0; s.len()];
    }
    s.iter().map(|v| (v - mean) / std).collect()
}

/// Divides by the population standard deviation without centring, so
/// zeros stay zeros and signs are preserved.
fn unit_scale(s: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(s);
    if std <= 1e-12 * mean.abs().max(1.0) {
        return s.to_vec();
    }
    s.iter().map(|v| v / std).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub start: usize,
    pub end: usize,
    /// One weight per variant, in [`VARIANT_LABELS`] order.
    pub weights: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTrace {
    pub labels: Vec<String>,
    pub variants: [Vec<f64>; 4],
    /// Disjoint blocks, or one single-index entry per time step with
    /// sliding weights.
    pub windows: Vec<WeightWindow>,
    pub ensemble: ScoreSeries,
}

fn window_weights(variants: &[Vec<f64>; 4], lo: usize, hi: usize) -> [f64; 4] {
    let n = (hi - lo) as f64;
    let mut w = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let mad: f64 = (lo..hi)
                    .map(|t| (variants[i][t] - variants[j][t]).abs())
                    .sum::<f64>()
                    / n;
                w[i] += mad;
            }
        }
    }
    w
}

fn combine_at(variants: &[Vec<f64>; 4], w: &[f64; 4], t: usize) -> f64 {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        (0..4).map(|i| w[i] * variants[i][t]).sum::<f64>() / total
    } else {
        variants.iter().map(|v| v[t]).sum::<f64>() / 4.0
    }
}

/// Builds the four score variants and mixes them with per-window weights
/// proportional to each variant's total disagreement with the others.
pub fn ensemble_score(
    cov: &ScoreSeries,
    dist: &ScoreSeries,
    config: &EnsembleConfig,
) -> Result<EnsembleTrace, EnsembleError> {
    config.validate()?;
    let len = cov.len();
    if dist.len() != len {
        return Err(EnsembleError::LengthMismatch {
            a: len,
            b: dist.len(),
        });
    }
    let (w, p) = (config.sg_window, config.sg_polyorder);
    let cov_u = unit_scale(&cov.scores);
    let dist_u = unit_scale(&dist.scores);
    let sg_cov = savgol_filter(&cov_u, w, p)?;
    let mixed: Vec<f64> = sg_cov.iter().zip(&dist_u).map(|(a, b)| a.abs() + b.abs()).collect();
    let sg_mixed = savgol_filter(&mixed, w, p)?;
    let variants = [
        zscore_normalize(&dist.scores),
        zscore_normalize(&cov.scores),
        sg_cov,
        sg_mixed,
    ];

    let mut windows = Vec::new();
    let mut out = vec![0.0; len];
    if config.sliding_weights {
        let half = config.weight_window / 2;
        for (t, o) in out.iter_mut().enumerate() {
            let lo = t.saturating_sub(half);
            let hi = (t + half + 1).min(len);
            let weights = window_weights(&variants, lo, hi);
            *o = combine_at(&variants, &weights, t);
            windows.push(WeightWindow {
                start: t,
                end: t + 1,
                weights,
            });
        }
    } else {
        let mut lo = 0;
        while lo < len {
            let hi = (lo + config.weight_window).min(len);
            let weights = window_weights(&variants, lo, hi);
            for (t, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
                *o = combine_at(&variants, &weights, t);
            }
            windows.push(WeightWindow {
                start: lo,
                end: hi,
                weights,
            });
            lo = hi;
        }
    }
    Ok(EnsembleTrace {
        labels: VARIANT_LABELS.iter().map(|s| s.to_string()).collect(),
        variants,
        windows,
        ensemble: ScoreSeries::new("Ensemble", out).map_err(|_| EnsembleError::NonFinite)?,
    })
}
