// SPDX-License-Identifier: MIT OR Apache-2.0

//! Radial base kernels and their normalised form.

use crate::error::MmdError;

/// A kernel that depends on the squared distance only.
pub trait RadialKernel: Send + Sync {
    fn name(&self) -> &'static str;

    /// `K(x, y)` given `||x - y||^2`.
    fn profile(&self, sq_dist: f64, bandwidth: f64) -> f64;

    /// `K(x,y) / mean(K(x,x), K(y,y))`: the arithmetic-mean generalisation of
    /// cosine normalisation. Radial kernels share one self-similarity value,
    /// so the denominator is `profile(0)`.
    fn normalized(&self, sq_dist: f64, bandwidth: f64) -> f64 {
        let self_sim = self.profile(0.0, bandwidth);
        self.profile(sq_dist, bandwidth) / (0.5 * (self_sim + self_sim))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl RadialKernel for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn profile(&self, sq_dist: f64, bandwidth: f64) -> f64 {
        (-sq_dist / (2.0 * bandwidth * bandwidth)).exp()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Laplacian;

impl RadialKernel for Laplacian {
    fn name(&self) -> &'static str {
        "laplacian"
    }

    fn profile(&self, sq_dist: f64, bandwidth: f64) -> f64 {
        (-sq_dist.sqrt() / bandwidth).exp()
    }
}

const KERNELS: &[(&str, fn() -> Box<dyn RadialKernel>)] = &[
    ("gaussian", || Box::new(Gaussian)),
    ("laplacian", || Box::new(Laplacian)),
];

/// Looks a kernel up by name.
pub fn kernel_by_name(name: &str) -> Result<Box<dyn RadialKernel>, MmdError> {
    KERNELS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, make)| make())
        .ok_or_else(|| MmdError::UnknownKernel(name.to_string()))
}

pub fn kernel_names() -> impl Iterator<Item = &'static str> {
    KERNELS.iter().map(|(n, _)| *n)
}

pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Normalised Gaussian kernel between two points.
pub fn normalized_kernel(x: &[f64], y: &[f64], bandwidth: f64) -> Result<f64, MmdError> {
    if !(bandwidth > 0.0) {
        return Err(MmdError::NonpositiveBandwidth(bandwidth));
    }
    if x.len() != y.len() {
        return Err(MmdError::DimensionMismatch {
            a: x.len(),
            b: y.len(),
        });
    }
    Ok(Gaussian.normalized(sq_dist(x, y), bandwidth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_give_one() {
        assert_eq!(normalized_kernel(&[0.3, -2.0], &[0.3, -2.0], 0.7).unwrap(), 1.0);
    }

    #[test]
    fn hand_value() {
        let v = normalized_kernel(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.6065306597126334).abs() < 1e-15);
    }

    #[test]
    fn far_points_vanish() {
        assert!(normalized_kernel(&[0.0], &[1e3], 1.0).unwrap() < 1e-300);
    }

    #[test]
    fn bandwidth_must_be_positive() {
        assert_eq!(
            normalized_kernel(&[0.0], &[1.0], 0.0),
            Err(MmdError::NonpositiveBandwidth(0.0))
        );
        assert!(normalized_kernel(&[0.0], &[1.0], f64::NAN).is_err());
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(kernel_by_name("laplacian").unwrap().name(), "laplacian");
        assert!(matches!(kernel_by_name("poly"), Err(MmdError::UnknownKernel(_))));
        assert_eq!(kernel_names().count(), 2);
    }

    proptest::proptest! {
        #[test]
        fn normalized_values_are_bounded(
            x in proptest::collection::vec(-50.0f64..50.0, 3),
            y in proptest::collection::vec(-50.0f64..50.0, 3),
            bw in 1e-3f64..100.0,
        ) {
            for k in [&Gaussian as &dyn RadialKernel, &Laplacian] {
                let v = k.normalized(sq_dist(&x, &y), bw);
                proptest::prop_assert!(v.abs() <= 1.0);
            }
        }
    }
}
