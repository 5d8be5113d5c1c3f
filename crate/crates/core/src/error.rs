// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error types, one enum per module plus a crate-level wrapper that keeps
//! the originating module visible in every message.

use thiserror::Error;

/// Errors raised by the shared domain types and preprocessing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("series needs d >= 1 features and T >= 2 time steps, got d={d}, T={t}")]
    InvalidShape { d: usize, t: usize },
    #[error("expected {expected} feature names, got {got}")]
    FeatureNameCount { expected: usize, got: usize },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeatureName(String),
    #[error("non-finite value in feature `{feature}` at t={t}")]
    NonFinite { feature: String, t: usize },
    #[error("feature `{feature}` has zero variance")]
    ZeroVarianceFeature { feature: String },
    #[error("correlation threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("only {remaining} feature(s) left after dropping correlated features; at least 2 are required")]
    AllFeaturesDropped { remaining: usize },
    #[error("score series has non-finite entry at t={0}")]
    NonFiniteScore(usize),
    #[error("change points must be strictly increasing and below T={len}: {indices:?}")]
    InvalidChangePoints { indices: Vec<usize>, len: usize },
    #[error("{path}: line {line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },
}

/// Errors raised by the time-varying graphical lasso.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TvglError {
    #[error("series of length {t} yields fewer than 2 slices of size {slice_size}")]
    SeriesTooShort { t: usize, slice_size: usize },
    #[error("slice size {slice_size} must be at least d+1 = {min}")]
    SliceTooSmall { slice_size: usize, min: usize },
    #[error("input covariance {index} is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetricInput { index: usize, asymmetry: f64 },
    #[error("covariance {index} has shape {rows}x{cols}, expected {d}x{d}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        d: usize,
    },
    #[error("no covariance slices supplied")]
    Empty,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("ADMM did not converge in {iters} iterations (primal {primal:e}, dual {dual:e})")]
    NotConverged { iters: usize, primal: f64, dual: f64 },
    #[error("index ({i}, {j}) out of range for dimension {d}")]
    IndexOutOfRange { i: usize, j: usize, d: usize },
    #[error("partial correlation requested on the diagonal (i = j = {0})")]
    DiagonalRequest(usize),
}

/// Errors raised by the kernel two-sample tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmdError {
    #[error("bandwidth must be positive, got {0}")]
    NonpositiveBandwidth(f64),
    #[error("window has {got} samples, at least 2 are required")]
    WindowTooSmall { got: usize },
    #[error("windows have different dimensions ({a} vs {b})")]
    DimensionMismatch { a: usize, b: usize },
    #[error("series of length {t} is too short for windows delta_minus={delta_minus}, delta_plus={delta_plus}")]
    SeriesTooShort {
        t: usize,
        delta_minus: usize,
        delta_plus: usize,
    },
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("invalid MMD configuration: {0}")]
    InvalidConfig(String),
}

/// Errors raised while combining scores.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("invalid Savitzky-Golay parameters: window={window}, polyorder={polyorder}, len={len}")]
    InvalidFilterParams {
        window: usize,
        polyorder: usize,
        len: usize,
    },
    #[error("score lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("ensemble score is not finite")]
    NonFinite,
}

/// Errors raised by the synthetic generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("unknown dataset family `{0}`")]
    UnknownFamily(String),
}

/// Crate-level error carrying the module of origin.
#[derive(Debug, Error)]
pub enum Error {
    #[error("core: {0}")]
    Core(#[from] CoreError),
    #[error("tvgl: {0}")]
    Tvgl(#[from] TvglError),
    #[error("mmd: {0}")]
    Mmd(#[from] MmdError),
    #[error("ensemble: {0}")]
    Ensemble(#[from] EnsembleError),
    #[error("datagen: {0}")]
    Datagen(#[from] DatagenError),
    #[error("config: {0}")]
    Config(String),
    #[error("detector: unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for failures of the numerical routines, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Tvgl(TvglError::NotConverged { .. }))
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
