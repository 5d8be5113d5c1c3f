// SPDX-License-Identifier: MIT OR Apache-2.0

use super::{Components, DetectConfig};
use crate::ensemble::{ensemble_score, savgol_filter, zscore_normalize, EnsembleTrace};
use crate::error::Error;
use crate::series::ScoreSeries;

pub struct Scored {
    pub score: ScoreSeries,
    pub threshold: f64,
    pub ensemble: Option<EnsembleTrace>,
}

pub trait Detector: Sync {
    /// Registry key.
    fn name(&self) -> &'static str;
    /// Row label in reports.
    fn label(&self) -> &'static str;
    fn uses_cov(&self) -> bool;
    fn uses_dist(&self) -> bool;
    fn score(&self, components: &Components, config: &DetectConfig) -> Result<Scored, Error>;
}

fn missing(branch: &str) -> Error {
    Error::Config(format!("the {branch} branch was not computed"))
}

/// `SG(z(s))`, the single-component score.
fn smoothed(s: &ScoreSeries, config: &DetectConfig, label: &str) -> Result<ScoreSeries, Error> {
    let e = &config.ensemble;
    let scores = savgol_filter(&zscore_normalize(&s.scores), e.sg_window, e.sg_polyorder)?;
    Ok(ScoreSeries {
        label: label.to_string(),
        scores,
    })
}

pub struct TiVaCpd;

impl Detector for TiVaCpd {
    fn name(&self) -> &'static str {
        "tivacpd"
    }
    fn label(&self) -> &'static str {
        "TiVaCPD"
    }
    fn uses_cov(&self) -> bool {
        true
    }
    fn uses_dist(&self) -> bool {
        true
    }
    fn score(&self, c: &Components, config: &DetectConfig) -> Result<Scored, Error> {
        let cov = c.cov.as_ref().ok_or_else(|| missing("covariance"))?;
        let dist = c.dist.as_ref().ok_or_else(|| missing("distribution"))?;
        let trace = ensemble_score(&cov.score, &dist.score, &config.ensemble)?;
        Ok(Scored {
            score: trace.ensemble.clone(),
            threshold: config.ensemble.peak_threshold,
            ensemble: Some(trace),
        })
    }
}

pub struct CovOnly;

impl Detector for CovOnly {
    fn name(&self) -> &'static str {
        "cov"
    }
    fn label(&self) -> &'static str {
        "CovScore-only"
    }
    fn uses_cov(&self) -> bool {
        true
    }
    fn uses_dist(&self) -> bool {
        false
    }
    fn score(&self, c: &Components, config: &DetectConfig) -> Result<Scored, Error> {
        let cov = c.cov.as_ref().ok_or_else(|| missing("covariance"))?;
        Ok(Scored {
            score: smoothed(&cov.score, config, "SG(z(CovScore))")?,
            threshold: config.ablation.cov_threshold,
            ensemble: None,
        })
    }
}

pub struct DistOnly;

impl Detector for DistOnly {
    fn name(&self) -> &'static str {
        "dist"
    }
    fn label(&self) -> &'static str {
        "DistScore-only"
    }
    fn uses_cov(&self) -> bool {
        false
    }
    fn uses_dist(&self) -> bool {
        true
    }
    fn score(&self, c: &Components, config: &DetectConfig) -> Result<Scored, Error> {
        let dist = c.dist.as_ref().ok_or_else(|| missing("distribution"))?;
        Ok(Scored {
            score: smoothed(&dist.score, config, "SG(z(DistScore))")?,
            threshold: config.ablation.dist_threshold,
            ensemble: None,
        })
    }
}

pub static DETECTORS: [&dyn Detector; 3] = [&TiVaCpd, &CovOnly, &DistOnly];

pub fn detector_names() -> Vec<&'static str> {
    DETECTORS.iter().map(|d| d.name()).collect()
}

pub fn detector_by_name(name: &str) -> Result<&'static dyn Detector, Error> {
    DETECTORS
        .iter()
        .copied()
        .find(|d| d.name() == name)
        .ok_or_else(|| Error::UnknownDetector(name.to_string()))
}
