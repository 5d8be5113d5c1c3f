// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded piecewise-stationary Gaussian series with known change points.
//!
//! All randomness comes from one `ChaCha8Rng` (rand_chacha 0.9, 8 rounds)
//! seeded with [`SimSpec::seed`] through `SeedableRng::seed_from_u64`.
//! Draws happen in a fixed order: segment lengths, then per-segment
//! parameters, then the noise matrix time-major (all features of `t = 0`,
//! then `t = 1`, ...). Normals use `rand_distr::StandardNormal`.

mod families;
mod segments;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use families::{
    gen_arbitrary, gen_changing_correlation, gen_changing_variance, gen_jumping_mean,
};
pub use segments::{segment_lengths, SegmentParams};

use crate::error::{DatagenError, Error};
use crate::series::{ChangePointSet, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpKind {
    Mean,
    Variance,
    Correlation,
    Mixed,
}

impl CpKind {
    pub const ALL: [CpKind; 4] = [CpKind::Mean, CpKind::Variance, CpKind::Correlation, CpKind::Mixed];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub seed: u64,
    /// Series length `T`.
    pub length: usize,
    pub dim: usize,
    pub n_segments: usize,
    pub min_segment_len: usize,
    /// Range of the absolute size of a mean jump; the sign is random.
    pub jump_range: (f64, f64),
    /// Probability that a given feature jumps at a mean change point. At
    /// least one feature always jumps.
    pub jump_prob: f64,
    /// Noise variance of the jumping-mean family and the initial variance
    /// of the arbitrary family.
    pub noise_variance: f64,
    /// Constant mean of the changing-variance family.
    pub variance_mean: f64,
    /// Variance levels, cycled segment by segment from a random offset.
    pub variance_levels: Vec<f64>,
    /// Range correlation values between features 0 and 1 are drawn from.
    pub rho_range: (f64, f64),
    /// Smallest change in correlation between adjacent segments.
    pub min_rho_change: f64,
    /// Explicit per-segment correlations. When set, its length replaces
    /// `n_segments`.
    pub rho: Option<Vec<f64>>,
    /// Kinds the arbitrary family draws from, uniformly.
    pub kinds: Vec<CpKind>,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            length: 500,
            dim: 3,
            n_segments: 5,
            min_segment_len: 50,
            jump_range: (1.0, 3.0),
            jump_prob: 0.5,
            noise_variance: 0.5,
            variance_mean: 1.0,
            variance_levels: vec![0.1, 0.5, 1.0, 2.0],
            rho_range: (-1.0, 1.0),
            min_rho_change: 0.5,
            rho: None,
            kinds: CpKind::ALL.to_vec(),
        }
    }
}

impl SimSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn segments(&self) -> usize {
        self.rho.as_ref().map_or(self.n_segments, Vec::len)
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: String| Err(DatagenError::InvalidSpec(m));
        let n = self.segments();
        if n == 0 || self.min_segment_len == 0 {
            return bad("need at least one segment of positive length".into());
        }
        if n * self.min_segment_len > self.length {
            return bad(format!(
                "{n} segments of at least {} do not fit in length {}",
                self.min_segment_len, self.length
            ));
        }
        if self.dim < 2 {
            return bad("dim must be at least 2".into());
        }
        let (lo, hi) = self.jump_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("jump_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"));
        }
        if !(0.0..=1.0).contains(&self.jump_prob) {
            return bad("jump_prob must lie in [0, 1]".into());
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return bad("noise_variance must be positive".into());
        }
        if !self.variance_mean.is_finite() {
            return bad("variance_mean must be finite".into());
        }
        if self.variance_levels.is_empty()
            || self.variance_levels.iter().any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return bad("variance_levels must be positive".into());
        }
        let cyc = &self.variance_levels;
        if cyc.len() > 1 && (0..cyc.len()).any(|i| cyc[i] == cyc[(i + 1) % cyc.len()]) {
            return bad("cyclically adjacent variance_levels must differ".into());
        }
        let (rlo, rhi) = self.rho_range;
        if !(-1.0 <= rlo && rlo <= rhi && rhi <= 1.0) {
            return bad(format!("rho_range must lie within [-1, 1], got ({rlo}, {rhi})"));
        }
        if !(self.min_rho_change >= 0.0 && self.min_rho_change <= (rhi - rlo) / 2.0) {
            return bad(format!(
                "min_rho_change must lie in [0, {}] for the given rho_range",
                (rhi - rlo) / 2.0
            ));
        }
        if let Some(rho) = &self.rho {
            if rho.iter().any(|r| !(-1.0..=1.0).contains(r)) {
                return bad("explicit rho values must lie in [-1, 1]".into());
            }
        }
        if self.kinds.is_empty() {
            return bad("kinds must not be empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub family: String,
    pub seed: u64,
    pub length: usize,
    pub change_points: ChangePointSet,
    /// One kind per change point.
    pub kinds: Vec<CpKind>,
    /// Half-open `[start, end)` bounds and parameters of every segment.
    pub segments: Vec<SegmentParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub series: TimeSeries,
    pub truth: GroundTruth,
}

impl SimDataset {
    pub fn change_points(&self) -> &ChangePointSet {
        &self.truth.change_points
    }

    /// Writes the series as CSV and the ground truth as pretty JSON.
    pub fn write(&self, csv_path: &Path, truth_path: &Path) -> Result<(), Error> {
        let mut f = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.series
            .write_csv(&mut f)
            .map_err(|e| Error::io(csv_path, e))?;
        let mut g = std::fs::File::create(truth_path).map_err(|e| Error::io(truth_path, e))?;
        serde_json::to_writer_pretty(&mut g, &self.truth).map_err(|e| Error::json(truth_path, e))?;
        writeln!(g).map_err(|e| Error::io(truth_path, e))?;
        Ok(())
    }
}

pub trait Generator: Sync {
    fn name(&self) -> &'static str;
    /// Human-readable family name used in reports.
    fn title(&self) -> &'static str;
    fn generate(&self, spec: &SimSpec) -> Result<SimDataset, DatagenError>;
}

macro_rules! generator {
    ($ty:ident, $name:literal, $title:literal, $f:path) => {
        pub struct $ty;
        impl Generator for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn title(&self) -> &'static str {
                $title
            }
            fn generate(&self, spec: &SimSpec) -> Result<SimDataset, DatagenError> {
                $f(spec)
            }
        }
    };
}

generator!(JumpingMean, "jumping_mean", "Jumping Mean", gen_jumping_mean);
generator!(ChangingVariance, "changing_variance", "Changing Variance", gen_changing_variance);
generator!(
    ChangingCorrelation,
    "changing_correlation",
    "Changing Correlation",
    gen_changing_correlation
);
generator!(Arbitrary, "arbitrary", "Arbitrary CPs", gen_arbitrary);

pub static GENERATORS: [&dyn Generator; 4] =
    [&JumpingMean, &ChangingVariance, &ChangingCorrelation, &Arbitrary];

pub fn family_names() -> Vec<&'static str> {
    GENERATORS.iter().map(|g| g.name()).collect()
}

pub fn generator_by_name(name: &str) -> Result<&'static dyn Generator, DatagenError> {
    GENERATORS
        .iter()
        .copied()
        .find(|g| g.name() == name)
        .ok_or_else(|| DatagenError::UnknownFamily(name.to_string()))
}

pub fn simulate(family: &str, spec: &SimSpec) -> Result<SimDataset, DatagenError> {
    generator_by_name(family)?.generate(spec)
}
