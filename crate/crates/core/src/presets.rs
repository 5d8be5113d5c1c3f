// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-family settings frozen from [`crate::tune::tune_thresholds`] runs on
//! the tuning seeds. Everything not listed keeps its [`DetectConfig`]
//! default.

use crate::detect::DetectConfig;
use crate::tune::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub family: &'static str,
    pub thresholds: Thresholds,
}

impl Preset {
    pub fn apply(&self, config: &mut DetectConfig) {
        self.thresholds.apply(config);
    }
}

const fn preset(family: &'static str, peak: f64, cov: f64, dist: f64) -> Preset {
    Preset {
        family,
        thresholds: Thresholds {
            peak_threshold: peak,
            cov_threshold: cov,
            dist_threshold: dist,
        },
    }
}

pub static PRESETS: [Preset; 4] = [
    preset("jumping_mean", 2.67, 1.81, 0.77),
    preset("changing_variance", 3.36, 0.12, 0.08),
    preset("changing_correlation", 1.81, 1.19, 3.96),
    preset("arbitrary", 2.02, 1.74, -0.12),
];

pub fn preset_for(family: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.family == family)
}

/// `base` with the preset of `family` applied, or `base` unchanged for a
/// family without one.
pub fn family_config(family: &str, base: &DetectConfig) -> DetectConfig {
    let mut config = base.clone();
    if let Some(p) = preset_for(family) {
        p.apply(&mut config);
    }
    config
}
