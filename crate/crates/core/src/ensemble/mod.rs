// SPDX-License-Identifier: MIT OR Apache-2.0

//! Combining CovScore and DistScore into one score and picking change
//! points from it.

mod combine;
mod peaks;
mod savgol;

use serde::{Deserialize, Serialize};

pub use combine::{ensemble_score, zscore_normalize, EnsembleTrace, WeightWindow, VARIANT_LABELS};
pub use peaks::{find_peaks, peak_finding};
pub use savgol::{savgol_filter, savitzky_golay};

use crate::error::EnsembleError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Length of the blocks over which variant weights are computed.
    pub weight_window: usize,
    pub sg_window: usize,
    pub sg_polyorder: usize,
    /// Minimum ensemble score of a reported change point.
    pub peak_threshold: f64,
    pub peak_min_distance: usize,
    /// Weight each index by a centred window instead of disjoint blocks.
    pub sliding_weights: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            weight_window: 21,
            sg_window: 11,
            sg_polyorder: 3,
            peak_threshold: 1.0,
            peak_min_distance: 15,
            sliding_weights: false,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.weight_window < 3 {
            return Err(EnsembleError::InvalidConfig(format!(
                "weight_window must be at least 3, got {}",
                self.weight_window
            )));
        }
        if self.sg_window < 5
            || self.sg_window.is_multiple_of(2)
            || self.sg_polyorder < 2
            || self.sg_polyorder >= self.sg_window
        {
            return Err(EnsembleError::InvalidConfig(format!(
                "sg_window must be odd and at least 5, sg_polyorder at least 2 and below it, got {} and {}",
                self.sg_window, self.sg_polyorder
            )));
        }
        if !self.peak_threshold.is_finite() {
            return Err(EnsembleError::InvalidConfig("peak_threshold must be finite".into()));
        }
        Ok(())
    }
}
