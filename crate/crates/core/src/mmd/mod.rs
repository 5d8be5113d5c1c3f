// SPDX-License-Identifier: MIT OR Apache-2.0

//! Aggregated kernel MMD two-sample tests and the dynamic-window
//! distribution-change score.

mod aggregate;
mod kernel;
mod statistic;
mod window;

use serde::{Deserialize, Serialize};

pub use aggregate::{bandwidth_grid, mmdagg, median_heuristic, BandwidthTest, MmdAgg, MmdResult};
pub use kernel::{kernel_by_name, kernel_names, normalized_kernel, Gaussian, Laplacian, RadialKernel};
pub use statistic::{mmd_statistic, PooledDistances};
pub use window::{dist_score, dist_score_traced, DistScoreTrace, WindowStep};

use crate::error::MmdError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmdConfig {
    /// Level of the aggregated test.
    pub alpha: f64,
    /// Base kernel name, see [`kernel_names`].
    pub kernel: String,
    /// Bandwidths are `median * bandwidth_base^e` for each exponent `e`.
    pub bandwidth_exponents: Vec<i32>,
    pub bandwidth_base: f64,
    /// Split `alpha` uniformly over the bandwidths.
    pub correction: bool,
    pub n_permutations: usize,
    /// Threshold a score must reach to count as a detection and reset the
    /// running window.
    pub epsilon: f64,
    /// Initial size of the window before the query point.
    pub delta_minus: usize,
    /// Size of the window after the query point.
    pub delta_plus: usize,
    /// Compare the aggregated rejection decision instead of the
    /// max-statistic score against `epsilon`.
    pub use_rejection_flag: bool,
    pub rng_seed: u64,
}

impl Default for MmdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            kernel: "gaussian".into(),
            bandwidth_exponents: vec![-2, -1, 0, 1, 2],
            bandwidth_base: 2.0,
            correction: true,
            n_permutations: 500,
            epsilon: 0.1,
            delta_minus: 20,
            delta_plus: 20,
            use_rejection_flag: false,
            rng_seed: 0,
        }
    }
}

impl MmdConfig {
    pub fn n_bandwidths(&self) -> usize {
        self.bandwidth_exponents.len()
    }

    /// Per-bandwidth level after the multiplicity correction.
    pub fn corrected_alpha(&self) -> f64 {
        if self.correction {
            self.alpha / self.n_bandwidths() as f64
        } else {
            self.alpha
        }
    }

    pub fn validate(&self) -> Result<(), MmdError> {
        let bad = |m: String| Err(MmdError::InvalidConfig(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.bandwidth_exponents.is_empty() {
            return bad("at least one bandwidth exponent is required".into());
        }
        if !(self.bandwidth_base > 0.0) {
            return bad("bandwidth_base must be positive".into());
        }
        let min_perms = (1.0 / self.alpha).ceil() as usize;
        if self.n_permutations < min_perms {
            return bad(format!(
                "n_permutations must be at least ceil(1/alpha) = {min_perms}"
            ));
        }
        if self.delta_minus < 2 || self.delta_plus < 2 {
            return bad("delta_minus and delta_plus must be at least 2".into());
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be non-negative".into());
        }
        kernel_by_name(&self.kernel)?;
        Ok(())
    }
}
