// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::segments::{bounds, render, segment_lengths, SegmentParams};
use super::{CpKind, GroundTruth, SimDataset, SimSpec};
use crate::error::DatagenError;
use crate::series::{ChangePointSet, TimeSeries};

/// Feature mask with each entry set with probability `p`, forcing one
/// entry on when the draw leaves all of them off.
fn feature_mask(d: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..d).map(|_| rng.random_bool(p)).collect();
    if !mask.iter().any(|&m| m) {
        mask[rng.random_range(0..d)] = true;
    }
    mask
}

fn jump_mean(mean: &mut [f64], spec: &SimSpec, rng: &mut ChaCha8Rng) {
    let (lo, hi) = spec.jump_range;
    let mask = feature_mask(mean.len(), spec.jump_prob, rng);
    for (m, on) in mean.iter_mut().zip(mask) {
        if on {
            let size = rng.random_range(lo..=hi);
            *m += if rng.random_bool(0.5) { size } else { -size };
        }
    }
}

fn change_variance(var: &mut [f64], spec: &SimSpec, rng: &mut ChaCha8Rng) {
    let mask = feature_mask(var.len(), spec.jump_prob, rng);
    for (v, on) in var.iter_mut().zip(mask) {
        let others: Vec<f64> = spec
            .variance_levels
            .iter()
            .copied()
            .filter(|l| l != v)
            .collect();
        if on && !others.is_empty() {
            *v = others[rng.random_range(0..others.len())];
        }
    }
}

/// Uniform over the part of `rho_range` at least `min_rho_change` away
/// from `prev`.
fn next_rho(prev: f64, spec: &SimSpec, rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = spec.rho_range;
    let m = spec.min_rho_change;
    let below = (prev - m - lo).max(0.0);
    let above = (hi - prev - m).max(0.0);
    if below + above <= 0.0 {
        return if prev - lo >= hi - prev { lo } else { hi };
    }
    let u = rng.random_range(0.0..below + above);
    if u < below {
        lo + u
    } else {
        prev + m + (u - below)
    }
}

fn assemble(
    family: &str,
    spec: &SimSpec,
    segments: Vec<SegmentParams>,
    kinds: Vec<CpKind>,
    rng: &mut ChaCha8Rng,
) -> SimDataset {
    let values = render(spec, &segments, rng);
    let mut cps = Vec::new();
    let mut cp_kinds = Vec::new();
    for (k, w) in segments.windows(2).enumerate() {
        let changed = w[0].mean != w[1].mean || w[0].variance != w[1].variance || w[0].rho != w[1].rho;
        if changed {
            cps.push(w[1].start);
            cp_kinds.push(kinds[k]);
        }
    }
    SimDataset {
        series: TimeSeries::from_matrix(values).expect("generated values are finite"),
        truth: GroundTruth {
            family: family.to_string(),
            seed: spec.seed,
            length: spec.length,
            change_points: ChangePointSet::new(cps, spec.length).expect("segment starts lie in (0, T)"),
            kinds: cp_kinds,
            segments,
        },
    }
}

/// Segment bounds plus a freshly seeded generator positioned after the
/// length draws.
fn setup(spec: &SimSpec) -> Result<(ChaCha8Rng, Vec<(usize, usize)>), DatagenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lengths = segment_lengths(spec.length, spec.segments(), spec.min_segment_len, &mut rng);
    Ok((rng, bounds(&lengths)))
}

pub fn gen_jumping_mean(spec: &SimSpec) -> Result<SimDataset, DatagenError> {
    let (mut rng, b) = setup(spec)?;
    let mut mean = vec![0.0; spec.dim];
    let mut segments = Vec::with_capacity(b.len());
    for (k, &(start, end)) in b.iter().enumerate() {
        if k > 0 {
            jump_mean(&mut mean, spec, &mut rng);
        }
        segments.push(SegmentParams {
            start,
            end,
            mean: mean.clone(),
            variance: vec![spec.noise_variance; spec.dim],
            rho: 0.0,
        });
    }
    let kinds = vec![CpKind::Mean; b.len()];
    Ok(assemble("jumping_mean", spec, segments, kinds, &mut rng))
}

pub fn gen_changing_variance(spec: &SimSpec) -> Result<SimDataset, DatagenError> {
    let (mut rng, b) = setup(spec)?;
    let levels = &spec.variance_levels;
    let offset = rng.random_range(0..levels.len());
    let segments = b
        .iter()
        .enumerate()
        .map(|(k, &(start, end))| SegmentParams {
            start,
            end,
            mean: vec![spec.variance_mean; spec.dim],
            variance: vec![levels[(offset + k) % levels.len()]; spec.dim],
            rho: 0.0,
        })
        .collect();
    let kinds = vec![CpKind::Variance; b.len()];
    Ok(assemble("changing_variance", spec, segments, kinds, &mut rng))
}

pub fn gen_changing_correlation(spec: &SimSpec) -> Result<SimDataset, DatagenError> {
    let (mut rng, b) = setup(spec)?;
    let rhos = match &spec.rho {
        Some(r) => r.clone(),
        None => {
            let mut r = vec![rng.random_range(spec.rho_range.0..=spec.rho_range.1)];
            for _ in 1..b.len() {
                let prev = *r.last().expect("nonempty");
                r.push(next_rho(prev, spec, &mut rng));
            }
            r
        }
    };
    let segments = b
        .iter()
        .zip(&rhos)
        .map(|(&(start, end), &rho)| SegmentParams {
            start,
            end,
            mean: vec![0.0; spec.dim],
            variance: vec![1.0; spec.dim],
            rho,
        })
        .collect();
    let kinds = vec![CpKind::Correlation; b.len()];
    Ok(assemble("changing_correlation", spec, segments, kinds, &mut rng))
}

/// Each change point draws a kind from `spec.kinds`. A mixed change
/// combines two or all three of the mean, variance and correlation moves.
pub fn gen_arbitrary(spec: &SimSpec) -> Result<SimDataset, DatagenError> {
    let (mut rng, b) = setup(spec)?;
    let mut mean = vec![0.0; spec.dim];
    let mut variance = vec![spec.noise_variance; spec.dim];
    let mut rho = 0.0;
    let mut segments = Vec::with_capacity(b.len());
    let mut kinds = Vec::with_capacity(b.len());
    for (k, &(start, end)) in b.iter().enumerate() {
        if k > 0 {
            let kind = spec.kinds[rng.random_range(0..spec.kinds.len())];
            let moves = match kind {
                CpKind::Mean => [true, false, false],
                CpKind::Variance => [false, true, false],
                CpKind::Correlation => [false, false, true],
                CpKind::Mixed => {
                    let skip = rng.random_range(0..4);
                    [skip != 0, skip != 1, skip != 2]
                }
            };
            if moves[0] {
                jump_mean(&mut mean, spec, &mut rng);
            }
            if moves[1] {
                change_variance(&mut variance, spec, &mut rng);
            }
            if moves[2] {
                rho = next_rho(rho, spec, &mut rng);
            }
            kinds.push(kind);
        }
        segments.push(SegmentParams {
            start,
            end,
            mean: mean.clone(),
            variance: variance.clone(),
            rho,
        });
    }
    Ok(assemble("arbitrary", spec, segments, kinds, &mut rng))
}
