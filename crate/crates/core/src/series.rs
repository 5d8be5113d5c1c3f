// SPDX-License-Identifier: MIT OR Apache-2.0

//! Domain types shared by every stage of the pipeline.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A multivariate series stored as a `d x T` matrix; column `t` is the
/// observation at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: DMatrix<f64>,
    feature_names: Vec<String>,
}

impl TimeSeries {
    pub fn new(values: DMatrix<f64>, feature_names: Vec<String>) -> Result<Self, CoreError> {
        let (d, t) = values.shape();
        if d < 1 || t < 2 {
            return Err(CoreError::InvalidShape { d, t });
        }
        if feature_names.len() != d {
            return Err(CoreError::FeatureNameCount {
                expected: d,
                got: feature_names.len(),
            });
        }
        let mut seen = HashSet::with_capacity(d);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(CoreError::DuplicateFeatureName(name.clone()));
            }
        }
        for (ti, col) in values.column_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite {
                    feature: feature_names[i].clone(),
                    t: ti,
                });
            }
        }
        Ok(Self {
            values,
            feature_names,
        })
    }

    /// Builds a series with default names `x0, x1, ...`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self, CoreError> {
        let names = (0..values.nrows()).map(|i| format!("x{i}")).collect();
        Self::new(values, names)
    }

    /// Builds a series from per-feature rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, CoreError> {
        let d = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(CoreError::InvalidShape { d, t: 0 });
        }
        Self::from_matrix(DMatrix::from_fn(d, t, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Observation `X_t` as a d-vector view.
    pub fn at(&self, t: usize) -> DVectorView<'_, f64> {
        self.values.column(t)
    }

    /// Keeps only the listed features, in the given order.
    pub fn select_features(&self, keep: &[usize]) -> Result<Self, CoreError> {
        let values = self.values.select_rows(keep);
        let names = keep.iter().map(|&i| self.feature_names[i].clone()).collect();
        Self::new(values, names)
    }

    /// Reads the CSV layout used throughout the crate: a header row of
    /// feature names, then one row per time step.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| CoreError::Csv {
            path: shown.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::from_csv_reader(file, &shown)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R, source: &str) -> Result<Self, CoreError> {
        let err = |line: u64, message: String| CoreError::Csv {
            path: source.to_string(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| err(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(err(1, "missing header row".into()));
        }
        let d = names.len();
        let mut data: Vec<f64> = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != d {
                return Err(err(
                    line,
                    format!("expected {d} fields, found {}", record.len()),
                ));
            }
            for (field, name) in record.iter().zip(&names) {
                if field.is_empty() {
                    return Err(err(line, format!("missing value for `{name}`")));
                }
                let v: f64 = field
                    .parse()
                    .map_err(|_| err(line, format!("cannot parse `{field}` for `{name}`")))?;
                if !v.is_finite() {
                    return Err(err(line, format!("non-finite value for `{name}`")));
                }
                data.push(v);
            }
        }
        let t = data.len() / d;
        // data is row-major over time, i.e. column-major over the d x T matrix
        let values = DMatrix::from_vec(d, t, data);
        Self::new(values, names).map_err(|e| err(0, e.to_string()))
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.feature_names)?;
        for col in self.values.column_iter() {
            w.write_record(col.iter().map(|v| format!("{v}")))?;
        }
        w.flush()
    }
}

/// A per-time-index score trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub label: String,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(label: impl Into<String>, scores: Vec<f64>) -> Result<Self, CoreError> {
        if let Some(t) = scores.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteScore(t));
        }
        Ok(Self {
            label: label.into(),
            scores,
        })
    }

    pub fn zeros(label: impl Into<String>, len: usize) -> Self {
        Self {
            label: label.into(),
            scores: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            label: self.label.clone(),
            scores: self.scores.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Strictly increasing change-point indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChangePointSet(Vec<usize>);

impl ChangePointSet {
    pub fn new(indices: Vec<usize>, len: usize) -> Result<Self, CoreError> {
        let ok = indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i < len);
        if !ok {
            return Err(CoreError::InvalidChangePoints { indices, len });
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates arbitrary indices; no bounds check.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}
