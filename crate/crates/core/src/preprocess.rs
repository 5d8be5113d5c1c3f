// SPDX-License-Identifier: MIT OR Apache-2.0

//! Preprocessing applied before the graphical-lasso branch.

use crate::error::CoreError;
use crate::series::TimeSeries;

/// Default absolute-correlation cut-off for [`drop_correlated_features`].
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.95;

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Pearson correlation of two equally long samples. Returns 0 when either
/// side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    (cov / (sa * sb)).clamp(-1.0, 1.0)
}

/// Z-scores every feature with the population (1/T) standard deviation.
pub fn standardize(x: &TimeSeries) -> Result<TimeSeries, CoreError> {
    let mut values = x.values().clone();
    for (i, name) in x.feature_names().iter().enumerate() {
        let row: Vec<f64> = values.row(i).iter().copied().collect();
        let (mean, std) = mean_std(&row);
        // relative guard so float residue in a constant column still counts as constant
        if std <= 1e-12 * mean.abs().max(1.0) {
            return Err(CoreError::ZeroVarianceFeature {
                feature: name.clone(),
            });
        }
        values.row_mut(i).apply(|v| *v = (*v - mean) / std);
    }
    TimeSeries::new(values, x.feature_names().to_vec())
}

/// Greedy scan in feature order: a feature is dropped when its absolute
/// Pearson correlation with any already-retained feature exceeds
/// `threshold`. Correlations use the whole series. A threshold of 1 or
/// more never drops anything.
pub fn drop_correlated_features(
    x: &TimeSeries,
    threshold: f64,
) -> Result<(TimeSeries, Vec<String>), CoreError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(CoreError::InvalidThreshold(threshold));
    }
    let rows: Vec<Vec<f64>> = (0..x.dim()).map(|i| x.feature(i)).collect();
    let mut kept: Vec<usize> = Vec::with_capacity(rows.len());
    let mut dropped = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if kept.iter().any(|&k| pearson(&rows[k], row).abs() > threshold) {
            dropped.push(x.feature_names()[i].clone());
        } else {
            kept.push(i);
        }
    }
    if kept.len() < 2 {
        return Err(CoreError::AllFeaturesDropped {
            remaining: kept.len(),
        });
    }
    Ok((x.select_features(&kept)?, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_rows(d: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..d)
            .map(|_| (0..t).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn standardize_three_points() {
        let x = TimeSeries::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let z = standardize(&x).unwrap().feature(0);
        // std = sqrt(2/3); (1-2)/sqrt(2/3) = -1.224744871391589
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn standardize_is_idempotent() {
        let x = TimeSeries::from_rows(&gaussian_rows(3, 50, 4)).unwrap();
        let once = standardize(&x).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.values().iter().zip(twice.values().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        for i in 0..3 {
            let (m, s) = mean_std(&once.feature(i));
            assert!(m.abs() < 1e-10 && (s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_feature_is_named() {
        let x = TimeSeries::new(
            nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 4.0, 5.0, 5.0, 5.0]),
            vec!["ok".into(), "flat".into()],
        )
        .unwrap();
        assert_eq!(
            standardize(&x),
            Err(CoreError::ZeroVarianceFeature {
                feature: "flat".into()
            })
        );
    }

    #[test]
    fn duplicate_feature_dropped() {
        let mut rows = gaussian_rows(2, 100, 9);
        rows.insert(1, rows[0].clone());
        let x = TimeSeries::from_rows(&rows).unwrap();
        let (kept, dropped) = drop_correlated_features(&x, 0.95).unwrap();
        assert_eq!(dropped, vec!["x1".to_string()]);
        assert_eq!(kept.feature_names(), &["x0".to_string(), "x2".to_string()]);
    }

    #[test]
    fn independent_features_survive() {
        let rows = gaussian_rows(3, 200, 21);
        // oracle: every pairwise correlation of this draw is far below the cut-off
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(pearson(&rows[i], &rows[j]).abs() < 0.3);
            }
        }
        let x = TimeSeries::from_rows(&rows).unwrap();
        let (kept, dropped) = drop_correlated_features(&x, 0.95).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(kept.dim(), 3);
    }

    #[test]
    fn threshold_at_or_above_one_drops_nothing() {
        let mut rows = gaussian_rows(2, 30, 1);
        rows.push(rows[0].iter().map(|v| 2.0 * v + 1.0).collect());
        let x = TimeSeries::from_rows(&rows).unwrap();
        assert!(drop_correlated_features(&x, 0.0).is_err());
        assert!(drop_correlated_features(&x, f64::NAN).is_err());
        assert_eq!(drop_correlated_features(&x, 1.0 + 1e-9).unwrap().1.len(), 0);
        assert_eq!(drop_correlated_features(&x, 0.99).unwrap().1, vec!["x2".to_string()]);
    }

    #[test]
    fn too_few_survivors() {
        let row = gaussian_rows(1, 30, 2).remove(0);
        let x = TimeSeries::from_rows(&[row.clone(), row]).unwrap();
        assert_eq!(
            drop_correlated_features(&x, 0.95),
            Err(CoreError::AllFeaturesDropped { remaining: 1 })
        );
    }

    proptest::proptest! {
        #[test]
        fn duplicated_feature_always_loses_a_copy(seed in 0u64..500, thr in 0.6f64..0.999) {
            let mut rows = gaussian_rows(2, 40, seed);
            rows.push(rows[0].clone());
            let x = TimeSeries::from_rows(&rows).unwrap();
            let (_, dropped) = drop_correlated_features(&x, thr).unwrap();
            proptest::prop_assert!(!dropped.is_empty());
        }
    }
}
