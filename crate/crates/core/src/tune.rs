// SPDX-License-Identifier: MIT OR Apache-2.0

//! Random search for peak thresholds on held-out simulated replicates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generator_by_name, SimDataset, SimSpec};
use crate::detect::{compute_components, detect_with, Components, DetectConfig, Detector, DETECTORS};
use crate::error::Error;
use crate::eval::{match_and_score, Summary};

/// Peak thresholds of the three detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub peak_threshold: f64,
    pub cov_threshold: f64,
    pub dist_threshold: f64,
}

impl Thresholds {
    pub fn apply(&self, config: &mut DetectConfig) {
        config.ensemble.peak_threshold = self.peak_threshold;
        config.ablation.cov_threshold = self.cov_threshold;
        config.ablation.dist_threshold = self.dist_threshold;
    }

    pub fn of(config: &DetectConfig) -> Self {
        Self {
            peak_threshold: config.ensemble.peak_threshold,
            cov_threshold: config.ablation.cov_threshold,
            dist_threshold: config.ablation.dist_threshold,
        }
    }

    fn set(&mut self, detector: &str, value: f64) {
        match detector {
            "cov" => self.cov_threshold = value,
            "dist" => self.dist_threshold = value,
            _ => self.peak_threshold = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    pub n_trials: usize,
    /// Tuning replicate `k` uses seed `seed_base + k`, away from the
    /// benchmark seeds.
    pub seed_base: u64,
    pub n_seeds: usize,
    pub range: (f64, f64),
    pub rng_seed: u64,
    pub margin: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            n_trials: 200,
            seed_base: 1000,
            n_seeds: 10,
            range: (-1.0, 6.0),
            rng_seed: 0,
            margin: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub family: String,
    pub thresholds: Thresholds,
    /// Mean tuning F1 of each detector at its chosen threshold, in
    /// `(name, f1)` pairs.
    pub f1: Vec<(String, f64)>,
}

fn mean_f1(
    data: &[(SimDataset, Components)],
    detector: &dyn Detector,
    config: &DetectConfig,
    margin: usize,
) -> Result<f64, Error> {
    let reports = data
        .iter()
        .map(|(ds, comps)| {
            let det = detect_with(comps, detector, config)?;
            Ok(match_and_score(&det.change_points, ds.change_points(), margin))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Summary::of(&reports).f1.mean)
}

/// Draws `n_trials` thresholds uniformly from `range` and keeps, for each
/// detector, the one with the best mean F1 (earliest draw on ties).
pub fn tune_thresholds(
    family: &str,
    spec: &SimSpec,
    base: &DetectConfig,
    tune: &TuneConfig,
) -> Result<TuneResult, Error> {
    let generator = generator_by_name(family)?;
    let data = (0..tune.n_seeds)
        .into_par_iter()
        .map(|k| {
            let ds = generator.generate(&spec.with_seed(tune.seed_base + k as u64))?;
            let comps = compute_components(&ds.series, base, true, true)?;
            Ok((ds, comps))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(tune.rng_seed);
    let (lo, hi) = tune.range;
    let draws: Vec<f64> = (0..tune.n_trials).map(|_| rng.random_range(lo..=hi)).collect();
    let mut thresholds = Thresholds::of(base);
    let mut f1 = Vec::new();
    for detector in DETECTORS {
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for &theta in &draws {
            let mut config = base.clone();
            let mut th = Thresholds::of(base);
            th.set(detector.name(), theta);
            th.apply(&mut config);
            let score = mean_f1(&data, detector, &config, tune.margin)?;
            if score > best.1 {
                best = (theta, score);
            }
        }
        thresholds.set(detector.name(), best.0);
        f1.push((detector.name().to_string(), best.1));
    }
    Ok(TuneResult {
        family: family.to_string(),
        thresholds,
        f1,
    })
}
