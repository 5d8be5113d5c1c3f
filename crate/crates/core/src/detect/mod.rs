// SPDX-License-Identifier: MIT OR Apache-2.0

//! The end-to-end pipeline: preprocessing, the covariance and distribution
//! branches, and a named detector that turns them into change points.

mod categorize;
mod registry;

use serde::{Deserialize, Serialize};

pub use categorize::{categorize, Category, CpCategory, Direction, PairChange};
pub use registry::{
    detector_by_name, detector_names, CovOnly, Detector, DistOnly, Scored, TiVaCpd, DETECTORS,
};

use crate::ensemble::{peak_finding, EnsembleConfig, EnsembleTrace};
use crate::error::{Error, TvglError};
use crate::mmd::{dist_score_traced, DistScoreTrace, MmdConfig};
use crate::preprocess::{drop_correlated_features, standardize, DEFAULT_CORRELATION_THRESHOLD};
use crate::series::{ChangePointSet, ScoreSeries, TimeSeries};
use crate::tvgl::{self, pair_change_heatmap, PairChangeHeatmap, TvglConfig, TvglSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub standardize: bool,
    /// Features whose absolute correlation with an earlier kept feature
    /// exceeds this are dropped.
    pub correlation_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            standardize: true,
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
        }
    }
}

/// Peak thresholds of the single-component detectors. Both act on the
/// smoothed z-score of their component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub cov_threshold: f64,
    pub dist_threshold: f64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            cov_threshold: 1.0,
            dist_threshold: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub preprocess: PreprocessConfig,
    pub tvgl: TvglConfig,
    pub mmd: MmdConfig,
    pub ensemble: EnsembleConfig,
    pub ablation: AblationConfig,
    /// Fail instead of warning when the solver hits its iteration cap.
    pub strict: bool,
}

impl DetectConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.tvgl.validate()?;
        self.mmd.validate()?;
        self.ensemble.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovBranch {
    pub score: ScoreSeries,
    pub solution: TvglSolution,
    pub heatmap: PairChangeHeatmap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistBranch {
    pub score: ScoreSeries,
    pub trace: DistScoreTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// The series after preprocessing.
    pub series: TimeSeries,
    pub dropped_features: Vec<String>,
    pub cov: Option<CovBranch>,
    pub dist: Option<DistBranch>,
}

pub fn preprocess(x: &TimeSeries, config: &PreprocessConfig) -> Result<(TimeSeries, Vec<String>), Error> {
    let x = if config.standardize {
        standardize(x)?
    } else {
        x.clone()
    };
    Ok(drop_correlated_features(&x, config.correlation_threshold)?)
}

fn cov_branch(x: &TimeSeries, config: &DetectConfig) -> Result<CovBranch, Error> {
    let (solution, score) = tvgl::estimate(x, &config.tvgl)?;
    if !solution.converged {
        if config.strict {
            return Err(TvglError::NotConverged {
                iters: solution.iterations,
                primal: solution.primal_residual,
                dual: solution.dual_residual,
            }
            .into());
        }
        log::warn!(
            "tvgl: stopped after {} iterations (primal {:.3e}, dual {:.3e})",
            solution.iterations,
            solution.primal_residual,
            solution.dual_residual
        );
    }
    let heatmap = pair_change_heatmap(&solution.precision, x.feature_names());
    Ok(CovBranch {
        score,
        solution,
        heatmap,
    })
}

fn dist_branch(x: &TimeSeries, config: &MmdConfig) -> Result<DistBranch, Error> {
    let (score, trace) = dist_score_traced(x, config)?;
    Ok(DistBranch { score, trace })
}

/// Preprocesses `x` and runs the requested branches concurrently.
pub fn compute_components(
    x: &TimeSeries,
    config: &DetectConfig,
    need_cov: bool,
    need_dist: bool,
) -> Result<Components, Error> {
    config.validate()?;
    let (series, dropped_features) = preprocess(x, &config.preprocess)?;
    let (cov, dist) = rayon::join(
        || need_cov.then(|| cov_branch(&series, config)).transpose(),
        || need_dist.then(|| dist_branch(&series, &config.mmd)).transpose(),
    );
    Ok(Components {
        series,
        dropped_features,
        cov: cov?,
        dist: dist?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub detector: &'static str,
    pub change_points: ChangePointSet,
    pub score: ScoreSeries,
    pub threshold: f64,
    pub ensemble: Option<EnsembleTrace>,
    pub categories: Vec<CpCategory>,
}

/// Scores precomputed components with `detector` and picks peaks.
pub fn detect_with(
    components: &Components,
    detector: &dyn Detector,
    config: &DetectConfig,
) -> Result<Detection, Error> {
    let scored = detector.score(components, config)?;
    let change_points = peak_finding(&scored.score, scored.threshold, config.ensemble.peak_min_distance);
    let categories = categorize(&change_points, components, config.ensemble.peak_min_distance);
    Ok(Detection {
        detector: detector.name(),
        change_points,
        score: scored.score,
        threshold: scored.threshold,
        ensemble: scored.ensemble,
        categories,
    })
}

pub fn detect(
    x: &TimeSeries,
    detector: &dyn Detector,
    config: &DetectConfig,
) -> Result<(Detection, Components), Error> {
    let components = compute_components(x, config, detector.uses_cov(), detector.uses_dist())?;
    let detection = detect_with(&components, detector, config)?;
    Ok((detection, components))
}
