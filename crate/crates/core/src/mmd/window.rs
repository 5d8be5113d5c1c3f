// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dynamic-window scan. The window before the query point grows by one
//! sample per step until a detection, then shrinks back to its initial
//! size; the window after the query point has fixed length.

use serde::{Deserialize, Serialize};

use super::aggregate::{MmdAgg, MmdResult};
use super::MmdConfig;
use crate::error::MmdError;
use crate::series::{ScoreSeries, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStep {
    pub t: usize,
    /// Running window size used at `t`; the prior window is
    /// `X[t - window ..= t]` and the future window `X[t + 1 ..= t + delta_plus]`.
    pub window: usize,
    pub score: f64,
    pub detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<MmdResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistScoreTrace {
    pub steps: Vec<WindowStep>,
}

impl DistScoreTrace {
    pub fn window_at(&self, t: usize) -> Option<usize> {
        self.steps.iter().find(|s| s.t == t).map(|s| s.window)
    }
}

fn step_seed(base: u64, t: usize) -> u64 {
    base ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// DistScore with the per-step trace. Indices whose windows would leave
/// `[0, T)` score 0.
pub fn dist_score_traced(
    x: &TimeSeries,
    config: &MmdConfig,
) -> Result<(ScoreSeries, DistScoreTrace), MmdError> {
    let agg = MmdAgg::new(config)?;
    let len = x.len();
    let (dm, dp) = (config.delta_minus, config.delta_plus);
    if len < dm + dp + 1 {
        return Err(MmdError::SeriesTooShort {
            t: len,
            delta_minus: dm,
            delta_plus: dp,
        });
    }
    let values = x.values();
    let mut scores = vec![0.0; len];
    let mut trace = DistScoreTrace::default();
    let mut window = dm;
    for t in dm..len - dp {
        let prior = values.columns(t - window, window + 1);
        let future = values.columns(t + 1, dp);
        let (score, detected, test) = if config.use_rejection_flag {
            let r = agg.test_seeded(prior, future, step_seed(config.rng_seed, t))?;
            (r.score, r.rejected, Some(r))
        } else {
            let s = agg.score(prior, future)?;
            (s, s >= config.epsilon, None)
        };
        trace.steps.push(WindowStep {
            t,
            window,
            score,
            detected,
            test,
        });
        if detected {
            scores[t] = score;
            window = dm;
        } else {
            window += 1;
        }
    }
    Ok((ScoreSeries::new("DistScore", scores).expect("finite statistics"), trace))
}

pub fn dist_score(x: &TimeSeries, config: &MmdConfig) -> Result<ScoreSeries, MmdError> {
    dist_score_traced(x, config).map(|(s, _)| s)
}
