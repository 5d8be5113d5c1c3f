// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multi-bandwidth permutation test. The aggregated test rejects when any
//! single-bandwidth test rejects at the corrected level; the continuous
//! score is the largest statistic over the grid.

use nalgebra::DMatrixView;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_by_name, RadialKernel};
use super::statistic::PooledDistances;
use super::MmdConfig;
use crate::error::MmdError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthTest {
    pub bandwidth: f64,
    pub statistic: f64,
    /// Permutation quantile the statistic has to exceed; `None` when the
    /// permutation step was skipped.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    pub score: f64,
    pub rejected: bool,
    /// The pooled sample had zero median distance and bandwidth 1 was used
    /// as the grid centre.
    pub degenerate_median: bool,
    pub per_bandwidth: Vec<BandwidthTest>,
}

/// Median pairwise distance of the pooled sample, or `None` when all
/// points coincide.
pub fn median_heuristic(pooled: &PooledDistances) -> Option<f64> {
    let m = pooled.median_distance();
    (m > 0.0 && m.is_finite()).then_some(m)
}

pub fn bandwidth_grid(centre: f64, config: &MmdConfig) -> Vec<f64> {
    config
        .bandwidth_exponents
        .iter()
        .map(|&e| centre * config.bandwidth_base.powi(e))
        .collect()
}

/// Index of the permutation order statistic used as rejection threshold:
/// the `ceil((B + 1)(1 - level))`-th smallest of `B` permuted statistics.
fn quantile_rank(n_perm: usize, level: f64) -> usize {
    let k = ((n_perm as f64 + 1.0) * (1.0 - level)).ceil() as usize;
    k.clamp(1, n_perm) - 1
}

/// Reusable aggregated tester bound to one configuration.
pub struct MmdAgg {
    config: MmdConfig,
    kernel: Box<dyn RadialKernel>,
}

impl MmdAgg {
    pub fn new(config: &MmdConfig) -> Result<Self, MmdError> {
        config.validate()?;
        Ok(Self {
            kernel: kernel_by_name(&config.kernel)?,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &MmdConfig {
        &self.config
    }

    fn prepare(
        &self,
        a: DMatrixView<'_, f64>,
        b: DMatrixView<'_, f64>,
    ) -> Result<(PooledDistances, Vec<f64>, bool), MmdError> {
        let pooled = PooledDistances::new(a, b)?;
        let (centre, degenerate) = match median_heuristic(&pooled) {
            Some(m) => (m, false),
            None => {
                log::warn!("mmd: pooled windows have zero median distance, using bandwidth 1");
                (1.0, true)
            }
        };
        Ok((pooled, bandwidth_grid(centre, &self.config), degenerate))
    }

    /// Max statistic over the bandwidth grid, without permutations.
    pub fn score(&self, a: DMatrixView<'_, f64>, b: DMatrixView<'_, f64>) -> Result<f64, MmdError> {
        let (pooled, grid, _) = self.prepare(a, b)?;
        let labels = pooled.identity_labels();
        Ok(grid
            .iter()
            .map(|&h| pooled.statistic_with(&pooled.kernel_matrix(self.kernel.as_ref(), h), &labels))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Full aggregated test. Permutations are drawn from `seed` and shared
    /// across bandwidths.
    pub fn test_seeded(
        &self,
        a: DMatrixView<'_, f64>,
        b: DMatrixView<'_, f64>,
        seed: u64,
    ) -> Result<MmdResult, MmdError> {
        let (pooled, grid, degenerate_median) = self.prepare(a, b)?;
        let identity = pooled.identity_labels();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms: Vec<Vec<usize>> = (0..self.config.n_permutations)
            .map(|_| {
                let mut p = identity.clone();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let rank = quantile_rank(perms.len(), self.config.corrected_alpha());

        let mut per_bandwidth = Vec::with_capacity(grid.len());
        let mut rejected = false;
        for &h in &grid {
            let k = pooled.kernel_matrix(self.kernel.as_ref(), h);
            let statistic = pooled.statistic_with(&k, &identity);
            let mut null: Vec<f64> = perms.iter().map(|p| pooled.statistic_with(&k, p)).collect();
            let (_, q, _) = null.select_nth_unstable_by(rank, f64::total_cmp);
            let threshold = *q;
            rejected |= statistic > threshold;
            per_bandwidth.push(BandwidthTest {
                bandwidth: h,
                statistic,
                threshold: Some(threshold),
            });
        }
        let score = per_bandwidth
            .iter()
            .map(|t| t.statistic)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(MmdResult {
            score,
            rejected,
            degenerate_median,
            per_bandwidth,
        })
    }

    pub fn test(&self, a: DMatrixView<'_, f64>, b: DMatrixView<'_, f64>) -> Result<MmdResult, MmdError> {
        self.test_seeded(a, b, self.config.rng_seed)
    }
}

/// One-shot aggregated test of window `a` against window `b` (`d x n`,
/// one sample per column).
pub fn mmdagg(
    a: DMatrixView<'_, f64>,
    b: DMatrixView<'_, f64>,
    config: &MmdConfig,
) -> Result<MmdResult, MmdError> {
    MmdAgg::new(config)?.test(a, b)
}
