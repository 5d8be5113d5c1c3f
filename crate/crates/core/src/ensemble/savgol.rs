// SPDX-License-Identifier: MIT OR Apache-2.0

//! Savitzky-Golay smoothing.
//!
//! Each output sample is the value at the window centre of the
//! least-squares polynomial fitted to the samples in the window. Near the
//! edges the window is truncated to the samples that exist and the fit is
//! evaluated at the (now off-centre) target index.

use nalgebra::DMatrix;

use crate::error::EnsembleError;
use crate::series::ScoreSeries;

/// Weights `c` such that `sum_k c[k] * y[lo + k]` is the fitted value at
/// `target`, for a fit of degree `order` over `len` samples starting at
/// `lo = 0`.
fn fit_weights(len: usize, target: usize, order: usize, scale: f64) -> Vec<f64> {
    let order = order.min(len - 1);
    let v = DMatrix::from_fn(len, order + 1, |k, p| {
        ((k as f64 - target as f64) / scale).powi(p as i32)
    });
    let pinv = v
        .svd(true, true)
        .pseudo_inverse(1e-13)
        .expect("svd with both factors");
    pinv.row(0).iter().copied().collect()
}

pub fn savgol_filter(s: &[f64], window: usize, polyorder: usize) -> Result<Vec<f64>, EnsembleError> {
    let len = s.len();
    if window.is_multiple_of(2) || polyorder >= window || len < window {
        return Err(EnsembleError::InvalidFilterParams {
            window,
            polyorder,
            len,
        });
    }
    let half = window / 2;
    let scale = half.max(1) as f64;
    let centre = fit_weights(window, half, polyorder, scale);
    let mut out = vec![0.0; len];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(len);
        let weights = if hi - lo == window {
            std::borrow::Cow::Borrowed(&centre)
        } else {
            std::borrow::Cow::Owned(fit_weights(hi - lo, i - lo, polyorder, scale))
        };
        *o = weights.iter().zip(&s[lo..hi]).map(|(w, y)| w * y).sum();
    }
    Ok(out)
}

pub fn savitzky_golay(
    s: &ScoreSeries,
    window: usize,
    polyorder: usize,
) -> Result<ScoreSeries, EnsembleError> {
    Ok(ScoreSeries {
        label: format!("SG({})", s.label),
        scores: savgol_filter(&s.scores, window, polyorder)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct per-window least squares through the normal equations,
    /// solved with Gaussian elimination on raw (unscaled) offsets.
    fn oracle(s: &[f64], window: usize, order: usize) -> Vec<f64> {
        let half = window / 2;
        (0..s.len())
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(s.len());
                let p = order.min(hi - lo - 1) + 1;
                let mut a = vec![vec![0.0; p + 1]; p];
                for k in lo..hi {
                    let x = k as f64 - i as f64;
                    for r in 0..p {
                        for c in 0..p {
                            a[r][c] += x.powi((r + c) as i32);
                        }
                        a[r][p] += x.powi(r as i32) * s[k];
                    }
                }
                for col in 0..p {
                    let piv = (col..p)
                        .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                        .unwrap();
                    a.swap(col, piv);
                    for r in 0..p {
                        if r != col {
                            let f = a[r][col] / a[col][col];
                            for c in col..=p {
                                a[r][c] -= f * a[col][c];
                            }
                        }
                    }
                }
                // coefficient of x^0, i.e. the fit evaluated at the target
                a[0][p] / a[0][0]
            })
            .collect()
    }

    #[test]
    fn reproduces_quadratic_with_cubic_fit() {
        let s: Vec<f64> = (0..40).map(|t| 0.5 * (t * t) as f64 - 3.0 * t as f64 + 2.0).collect();
        let out = savgol_filter(&s, 11, 3).unwrap();
        for (a, b) in out.iter().zip(&s) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_unchanged() {
        let s = vec![2.5; 15];
        let out = savgol_filter(&s, 5, 2).unwrap();
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn noisy_sine_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s: Vec<f64> = (0..120)
            .map(|t| (t as f64 * 0.17).sin() + 0.3 * (rng.random::<f64>() - 0.5))
            .collect();
        let out = savgol_filter(&s, 11, 3).unwrap();
        for (a, b) in out.iter().zip(oracle(&s, 11, 3)) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn invalid_parameters() {
        let s = vec![0.0; 20];
        assert!(savgol_filter(&s, 10, 3).is_err());
        assert!(savgol_filter(&s, 5, 5).is_err());
        assert!(savgol_filter(&s[..4], 5, 2).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(100))]
        #[test]
        fn reproduces_polynomials_up_to_order(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 4),
            degree in 0usize..4,
            order in 2usize..5,
            half in 2usize..7,
            len in 30usize..80,
        ) {
            let window = 2 * half + 1;
            let order = order.min(window - 1);
            let degree = degree.min(order);
            let s: Vec<f64> = (0..len)
                .map(|t| {
                    let x = t as f64 / len as f64 * 4.0 - 2.0;
                    (0..=degree).map(|p| coeffs[p] * x.powi(p as i32)).sum()
                })
                .collect();
            let out = savgol_filter(&s, window, order).unwrap();
            for (a, b) in out.iter().zip(&s) {
                proptest::prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
