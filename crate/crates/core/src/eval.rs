// SPDX-License-Identifier: MIT OR Apache-2.0

//! Margin-based matching of detected change points against ground truth.

use serde::{Deserialize, Serialize};

use crate::series::ChangePointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginRule {
    /// `|t* - t| <= M`.
    #[default]
    Full,
    /// `|t* - t| <= M / 2`.
    Half,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub margin: usize,
    /// `(truth, predicted)` pairs.
    pub matches: Vec<(usize, usize)>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl EvalReport {
    fn from_matches(matches: Vec<(usize, usize)>, n_pred: usize, n_truth: usize, margin: usize) -> Self {
        let tp = matches.len();
        let precision = ratio(tp, n_pred);
        let recall = ratio(tp, n_truth);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp: n_pred - tp,
            fn_: n_truth - tp,
            precision,
            recall,
            f1,
            margin,
            matches,
        }
    }
}

/// One-to-one greedy matching: candidate pairs are taken in order of
/// distance, then truth index, then predicted index.
pub fn match_and_score_with(
    predicted: &ChangePointSet,
    truth: &ChangePointSet,
    margin: usize,
    rule: MarginRule,
) -> EvalReport {
    let accept = |dist: usize| match rule {
        MarginRule::Full => dist <= margin,
        MarginRule::Half => 2 * dist <= margin,
    };
    let mut pairs: Vec<(usize, usize, usize)> = truth
        .iter()
        .flat_map(|t| predicted.iter().map(move |p| (t.abs_diff(p), t, p)))
        .filter(|&(d, _, _)| accept(d))
        .collect();
    pairs.sort_unstable();
    let mut used_t = std::collections::HashSet::new();
    let mut used_p = std::collections::HashSet::new();
    let mut matches = Vec::new();
    for (_, t, p) in pairs {
        if !used_t.contains(&t) && !used_p.contains(&p) {
            used_t.insert(t);
            used_p.insert(p);
            matches.push((t, p));
        }
    }
    matches.sort_unstable();
    EvalReport::from_matches(matches, predicted.len(), truth.len(), margin)
}

pub fn match_and_score(predicted: &ChangePointSet, truth: &ChangePointSet, margin: usize) -> EvalReport {
    match_and_score_with(predicted, truth, margin, MarginRule::Full)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation; an empty input gives zeros.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ({:.2})", self.mean, self.std)
    }
}

/// Mean and spread of precision, recall and F1 over replicates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub runs: usize,
}

impl Summary {
    pub fn of(reports: &[EvalReport]) -> Self {
        let col = |f: fn(&EvalReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
        Self {
            precision: col(|r| r.precision),
            recall: col(|r| r.recall),
            f1: col(|r| r.f1),
            runs: reports.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> ChangePointSet {
        ChangePointSet::from_unsorted(v.to_vec())
    }

    #[test]
    fn exact_match_is_perfect() {
        let r = match_and_score(&set(&[10, 50]), &set(&[10, 50]), 0);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_prediction() {
        let r = match_and_score(&set(&[]), &set(&[100]), 5);
        assert_eq!((r.tp, r.fp, r.fn_), (0, 0, 1));
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn one_truth_two_predictions() {
        let r = match_and_score(&set(&[103, 108]), &set(&[100]), 5);
        assert_eq!((r.tp, r.fp, r.fn_), (1, 1, 0));
        assert_eq!(r.matches, vec![(100, 103)]);
        assert_eq!((r.precision, r.recall), (0.5, 1.0));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_claimed_by_closest_truth() {
        let r = match_and_score(&set(&[104]), &set(&[100, 105]), 5);
        assert_eq!(r.matches, vec![(105, 104)]);
        let r = match_and_score(&set(&[102]), &set(&[100, 104]), 5);
        assert_eq!(r.matches, vec![(100, 102)]);
    }

    #[test]
    fn half_margin() {
        let r = match_and_score_with(&set(&[103]), &set(&[100]), 5, MarginRule::Half);
        assert_eq!(r.tp, 0);
        let r = match_and_score_with(&set(&[102]), &set(&[100]), 5, MarginRule::Half);
        assert_eq!(r.tp, 1);
    }

    #[test]
    fn summary_format() {
        let s = MeanStd::of(&[1.0, 1.0]);
        assert_eq!(s.to_string(), "1.00 (0.00)");
    }

    proptest::proptest! {
        #[test]
        fn counts_are_consistent(
            p in proptest::collection::btree_set(0usize..300, 0..15),
            t in proptest::collection::btree_set(0usize..300, 0..15),
            m in 0usize..30,
        ) {
            let (ps, ts) = (set(&p.into_iter().collect::<Vec<_>>()), set(&t.into_iter().collect::<Vec<_>>()));
            let r = match_and_score(&ps, &ts, m);
            proptest::prop_assert_eq!(r.tp + r.fn_, ts.len());
            proptest::prop_assert_eq!(r.tp + r.fp, ps.len());
            for &(a, b) in &r.matches {
                proptest::prop_assert!(a.abs_diff(b) <= m);
            }
            proptest::prop_assert!((0.0..=1.0).contains(&r.f1));
        }
    }
}
