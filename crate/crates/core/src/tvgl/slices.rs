// SPDX-License-Identifier: MIT OR Apache-2.0

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::TvglError;
use crate::series::TimeSeries;

/// How each slice is summarised before it is handed to the solver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceEstimator {
    /// Uncentred `(1/n) sum x x^T`.
    SecondMoment,
    /// Centred covariance with the slice mean removed.
    Covariance,
    /// Centred covariance rescaled to unit diagonal.
    #[default]
    Correlation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovSlice {
    pub cov: DMatrix<f64>,
    pub range: Range<usize>,
}

/// Consecutive non-overlapping slices of `slice_size` points. A trailing
/// remainder of at least `d + 1` points becomes its own slice, a shorter
/// one is merged into the previous slice.
pub fn slice_ranges(t: usize, d: usize, slice_size: usize) -> Result<Vec<Range<usize>>, TvglError> {
    if slice_size < d + 1 {
        return Err(TvglError::SliceTooSmall {
            slice_size,
            min: d + 1,
        });
    }
    let full = t / slice_size;
    let rem = t % slice_size;
    let mut ranges: Vec<Range<usize>> = (0..full)
        .map(|k| k * slice_size..(k + 1) * slice_size)
        .collect();
    if rem > 0 {
        if rem > d {
            ranges.push(full * slice_size..t);
        } else if let Some(last) = ranges.last_mut() {
            last.end = t;
        }
    }
    if ranges.len() < 2 {
        return Err(TvglError::SeriesTooShort { t, slice_size });
    }
    Ok(ranges)
}

/// Windows of `slice_size` points starting every `stride` points. A
/// stride of at least `slice_size` gives [`slice_ranges`]; with a smaller
/// stride a final window ending at `t` is added when the regular grid
/// stops short of it.
pub fn strided_ranges(
    t: usize,
    d: usize,
    slice_size: usize,
    stride: usize,
) -> Result<Vec<Range<usize>>, TvglError> {
    if stride == 0 || stride >= slice_size {
        return slice_ranges(t, d, slice_size);
    }
    if slice_size < d + 1 {
        return Err(TvglError::SliceTooSmall {
            slice_size,
            min: d + 1,
        });
    }
    let mut ranges: Vec<Range<usize>> = (0..)
        .map(|k| k * stride)
        .take_while(|s| s + slice_size <= t)
        .map(|s| s..s + slice_size)
        .collect();
    if let Some(last) = ranges.last() {
        if last.end < t {
            ranges.push(t - slice_size..t);
        }
    }
    if ranges.len() < 2 {
        return Err(TvglError::SeriesTooShort { t, slice_size });
    }
    Ok(ranges)
}

fn slice_matrix(x: &TimeSeries, range: &Range<usize>, estimator: SliceEstimator) -> DMatrix<f64> {
    let d = x.dim();
    let block = x.values().columns(range.start, range.len());
    let n = range.len() as f64;
    let centred = match estimator {
        SliceEstimator::SecondMoment => block.into_owned(),
        SliceEstimator::Covariance | SliceEstimator::Correlation => {
            let mean = block.column_mean();
            let mut c = block.into_owned();
            for mut col in c.column_iter_mut() {
                col -= &mean;
            }
            c
        }
    };
    let mut cov = (&centred * centred.transpose()) / n;
    if estimator == SliceEstimator::Correlation {
        let scale: Vec<f64> = (0..d)
            .map(|i| {
                let v = cov[(i, i)];
                // a constant slice keeps unit scale so the diagonal stays defined
                if v > 1e-12 { v.sqrt().recip() } else { 1.0 }
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] *= scale[i] * scale[j];
            }
            if cov[(i, i)] < 1e-12 {
                cov[(i, i)] = 1.0;
            }
        }
    }
    cov
}

/// Per-slice empirical covariance summaries.
pub fn slice_covariances(
    x: &TimeSeries,
    slice_size: usize,
    estimator: SliceEstimator,
) -> Result<Vec<CovSlice>, TvglError> {
    slice_covariances_strided(x, slice_size, slice_size, estimator)
}

pub fn slice_covariances_strided(
    x: &TimeSeries,
    slice_size: usize,
    stride: usize,
    estimator: SliceEstimator,
) -> Result<Vec<CovSlice>, TvglError> {
    let ranges = strided_ranges(x.len(), x.dim(), slice_size, stride)?;
    Ok(ranges
        .into_iter()
        .map(|range| CovSlice {
            cov: slice_matrix(x, &range, estimator),
            range,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn strided_windows() {
        let r = strided_ranges(25, 3, 10, 5).unwrap();
        assert_eq!(r, vec![0..10, 5..15, 10..20, 15..25]);
        let r = strided_ranges(27, 3, 10, 5).unwrap();
        assert_eq!(r.last(), Some(&(17..27)));
        assert_eq!(strided_ranges(100, 3, 10, 10).unwrap(), slice_ranges(100, 3, 10).unwrap());
    }

    #[test]
    fn exact_division() {
        let r = slice_ranges(100, 3, 10).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], 0..10);
        assert_eq!(r[9], 90..100);
    }

    #[test]
    fn remainder_kept_or_merged() {
        // remainder 5 >= d+1 = 4: own slice
        let r = slice_ranges(105, 3, 10).unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r[10], 100..105);
        // remainder 3 < 4: merged
        let r = slice_ranges(103, 3, 10).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[9], 90..103);
    }

    #[test]
    fn too_short_or_too_small() {
        assert_eq!(
            slice_ranges(13, 3, 10),
            Err(TvglError::SeriesTooShort {
                t: 13,
                slice_size: 10
            })
        );
        assert!(matches!(
            slice_ranges(100, 3, 3),
            Err(TvglError::SliceTooSmall { .. })
        ));
    }

    #[test]
    fn iid_slice_is_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (d, t) = (3, 1000);
        let m = DMatrix::from_fn(d, t, |_, _| StandardNormal.sample(&mut rng));
        let x = TimeSeries::from_matrix(m.clone()).unwrap();
        let slices = slice_covariances(&x, 500, SliceEstimator::SecondMoment).unwrap();
        assert_eq!(slices.len(), 2);
        for s in &slices {
            // oracle: explicit double loop over the slice
            for i in 0..d {
                for j in 0..d {
                    let direct: f64 =
                        s.range.clone().map(|k| m[(i, k)] * m[(j, k)]).sum::<f64>() / 500.0;
                    assert!((s.cov[(i, j)] - direct).abs() < 1e-12);
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((s.cov[(i, j)] - target).abs() < 0.15);
                }
            }
        }
    }

    #[test]
    fn correlation_estimator_has_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(3, 40, |i, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (i as f64 + 1.0) * z + 5.0
        });
        let x = TimeSeries::from_matrix(m).unwrap();
        for s in slice_covariances(&x, 10, SliceEstimator::Correlation).unwrap() {
            for i in 0..3 {
                assert!((s.cov[(i, i)] - 1.0).abs() < 1e-12);
            }
            assert!((&s.cov - s.cov.transpose()).amax() < 1e-15);
        }
    }
}
