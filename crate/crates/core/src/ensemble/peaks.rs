// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::series::{ChangePointSet, ScoreSeries};

/// Interior local maxima at or above `theta`. A plateau counts once, at
/// its leftmost index, and only if the signal falls after it. Peaks closer
/// than `min_distance` to a higher kept peak are suppressed; equal heights
/// favour the earlier index.
pub fn find_peaks(s: &[f64], theta: f64, min_distance: usize) -> Vec<usize> {
    let n = s.len();
    if n < 3 {
        return Vec::new();
    }
    let mut candidates = Vec::new();
    let mut t = 1;
    while t + 1 < n {
        if s[t] > s[t - 1] {
            let mut end = t;
            while end + 1 < n && s[end + 1] == s[t] {
                end += 1;
            }
            if end + 1 < n && s[end + 1] < s[t] && s[t] >= theta {
                candidates.push(t);
            }
            t = end + 1;
        } else {
            t += 1;
        }
    }
    if min_distance <= 1 {
        return candidates;
    }
    let mut by_height = candidates.clone();
    by_height.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in by_height {
        if kept.iter().all(|&k| k.abs_diff(p) >= min_distance) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

pub fn peak_finding(s: &ScoreSeries, theta: f64, min_distance: usize) -> ChangePointSet {
    ChangePointSet::from_unsorted(find_peaks(&s.scores, theta, min_distance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_has_no_peaks() {
        let s: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(find_peaks(&s, f64::NEG_INFINITY, 1).is_empty());
    }

    #[test]
    fn two_separated_peaks() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0, 0.0, 2.0, 0.0], 0.5, 1), vec![1, 4]);
    }

    #[test]
    fn higher_neighbour_suppresses() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0, 2.0, 0.0], 0.5, 3), vec![3]);
    }

    #[test]
    fn threshold_filters() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0, 2.0, 0.0], 1.5, 1), vec![3]);
    }

    #[test]
    fn plateau_reports_leftmost_and_needs_descent() {
        assert_eq!(find_peaks(&[0.0, 2.0, 2.0, 2.0, 1.0], 0.0, 1), vec![1]);
        assert!(find_peaks(&[0.0, 2.0, 2.0, 3.0, 3.0], 0.0, 1).is_empty());
        assert_eq!(find_peaks(&[0.0, 2.0, 2.0, 3.0, 0.0], 0.0, 1), vec![3]);
    }

    #[test]
    fn equal_heights_keep_earlier() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0, 5), vec![1]);
    }

    proptest::proptest! {
        #[test]
        fn reported_peaks_satisfy_definition(
            s in proptest::collection::vec(-3.0f64..3.0, 3..80),
            theta in -1.0f64..2.0,
            min_distance in 0usize..8,
        ) {
            let peaks = find_peaks(&s, theta, min_distance);
            for w in peaks.windows(2) {
                proptest::prop_assert!(w[0] < w[1]);
                if min_distance > 1 {
                    proptest::prop_assert!(w[1] - w[0] >= min_distance);
                }
            }
            for &p in &peaks {
                proptest::prop_assert!(p >= 1 && p + 1 < s.len());
                proptest::prop_assert!(s[p] > s[p - 1] && s[p] >= s[p + 1] && s[p] >= theta);
            }
        }
    }
}
