// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub start: usize,
    pub end: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Correlation between features 0 and 1.
    pub rho: f64,
}

/// Draws `n` lengths uniformly in `[min, 2 min]` and rescales them to sum
/// to `total`, distributing rounding by largest remainder. If rescaling
/// would push a segment below `min`, the surplus over `n * min` is split
/// in proportion to the draws instead.
pub fn segment_lengths(total: usize, n: usize, min: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let draws: Vec<f64> = (0..n)
        .map(|_| rng.random_range(min as f64..=2.0 * min as f64))
        .collect();
    let sum: f64 = draws.iter().sum();
    let scaled: Vec<f64> = draws.iter().map(|u| u * total as f64 / sum).collect();
    if scaled.iter().all(|&v| v.floor() >= min as f64) {
        return round_to_total(&scaled, total);
    }
    let surplus = (total - n * min) as f64;
    let extra: Vec<f64> = draws.iter().map(|u| u / sum * surplus).collect();
    round_to_total(&extra, total - n * min)
        .into_iter()
        .map(|e| e + min)
        .collect()
}

fn round_to_total(x: &[f64], total: usize) -> Vec<usize> {
    let mut out: Vec<usize> = x.iter().map(|v| v.floor() as usize).collect();
    let missing = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| (x[b] - x[b].floor()).total_cmp(&(x[a] - x[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(missing) {
        out[i] += 1;
    }
    out
}

pub(super) fn bounds(lengths: &[usize]) -> Vec<(usize, usize)> {
    let mut start = 0;
    lengths
        .iter()
        .map(|&l| {
            let b = (start, start + l);
            start += l;
            b
        })
        .collect()
}

/// Samples `x_t = mean + sqrt(variance) * z_t`, where `z_t` is standard
/// normal except that feature 1 is replaced by `rho z_0 + sqrt(1 - rho^2) z_1`.
pub(super) fn render(spec: &SimSpec, segments: &[SegmentParams], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (d, len) = (spec.dim, spec.length);
    let mut z = DMatrix::<f64>::zeros(d, len);
    for t in 0..len {
        for i in 0..d {
            z[(i, t)] = StandardNormal.sample(rng);
        }
    }
    for seg in segments {
        let c = (1.0 - seg.rho * seg.rho).max(0.0).sqrt();
        for t in seg.start..seg.end {
            z[(1, t)] = seg.rho * z[(0, t)] + c * z[(1, t)];
            for i in 0..d {
                z[(i, t)] = seg.mean[i] + seg.variance[i].sqrt() * z[(i, t)];
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    proptest::proptest! {
        #[test]
        fn lengths_sum_and_respect_minimum(
            seed in 0u64..10_000,
            n in 1usize..8,
            min in 1usize..60,
            slack in 0usize..300,
        ) {
            let total = n * min + slack;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = segment_lengths(total, n, min, &mut rng);
            proptest::prop_assert_eq!(l.len(), n);
            proptest::prop_assert_eq!(l.iter().sum::<usize>(), total);
            proptest::prop_assert!(l.iter().all(|&v| v >= min));
        }
    }
}
