//! Pure selection rules shared by the policies.

use alloc::vec::Vec;

use crate::error::{invalid_input, Result};

/// `t^(-exponent)`, clamped to `(0, 1]`.
pub fn exploration_probability(t: u64, exponent: f64) -> Result<f64> {
    if t < 1 {
        return Err(invalid_input!("rounds are numbered from 1"));
    }
    if !(exponent > 0.0) {
        return Err(invalid_input!("exploration exponent must be positive, got {exponent}"));
    }
    Ok(libm::pow(t as f64, -exponent).clamp(f64::MIN_POSITIVE, 1.0))
}

/// Index of the largest value; ties go to the lowest index. NaN never wins.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            _ if v.is_nan() => {}
            None => best = Some(i),
            Some(b) if v > values[b] => best = Some(i),
            Some(_) => {}
        }
    }
    best
}

/// How the interval chain around the top arm is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainRule {
    /// Transitive closure of pairwise overlap.
    #[default]
    Transitive,
    /// Only arms whose interval overlaps the top arm's.
    Direct,
}

fn overlaps(lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64) -> bool {
    lo_a <= hi_b && lo_b <= hi_a
}

/// Arms chained to the arm with the highest upper end, in ascending order.
pub fn interval_chain(lower: &[f64], upper: &[f64], rule: ChainRule) -> Vec<usize> {
    let Some(top) = argmax_lowest(upper) else {
        return Vec::new();
    };
    let n = upper.len();
    let mut in_chain = alloc::vec![false; n];
    in_chain[top] = true;
    match rule {
        ChainRule::Direct => {
            for i in 0..n {
                if overlaps(lower[i], upper[i], lower[top], upper[top]) {
                    in_chain[i] = true;
                }
            }
        }
        ChainRule::Transitive => {
            let mut frontier = alloc::vec![top];
            while let Some(a) = frontier.pop() {
                for b in 0..n {
                    if !in_chain[b] && overlaps(lower[a], upper[a], lower[b], upper[b]) {
                        in_chain[b] = true;
                        frontier.push(b);
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| in_chain[i]).collect()
}

/// Bias-corrected optimistic value of a sensitive arm in the two-group rule.
pub fn two_group_bound(
    mean: f64,
    width: f64,
    sensitive_fit: f64,
    sensitive_width: f64,
    other_fit: f64,
    other_width: f64,
) -> f64 {
    mean + width - sensitive_fit + sensitive_width + other_fit + other_width
}

/// Optimistic value of an arm in the multi-group rule.
pub fn multi_group_bound(mean: f64, width: f64, rho: f64, group_fit: f64, group_width: f64) -> f64 {
    mean + width + rho - group_fit + group_width
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exploration_probability_examples() {
        assert_eq!(exploration_probability(1, 1.0 / 3.0).unwrap(), 1.0);
        assert!((exploration_probability(8, 1.0 / 3.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((exploration_probability(1000, 1.0 / 3.0).unwrap() - 0.1).abs() < 1e-12);
        assert!(exploration_probability(0, 1.0 / 3.0).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_lowest(&[2.3, 1.1]), Some(0));
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax_lowest(&[f64::INFINITY, 5.0, f64::INFINITY]), Some(0));
        assert_eq!(argmax_lowest(&[f64::NAN, 1.0]), Some(1));
        assert_eq!(argmax_lowest(&[]), None);
    }

    #[test]
    fn chain_examples() {
        assert_eq!(interval_chain(&[1.0, 2.0, 5.0], &[3.0, 4.0, 6.0], ChainRule::Transitive), vec![2]);
        assert_eq!(interval_chain(&[1.0, 2.0], &[3.0, 4.0], ChainRule::Transitive), vec![0, 1]);
        assert_eq!(interval_chain(&[1.0], &[2.0], ChainRule::Transitive), vec![0]);
    }

    #[test]
    fn transitive_and_direct_chains_differ() {
        // [0,1] touches [0.9,2] which touches [1.9,3] (the top); [0,1] misses the top directly
        let lo = [0.0, 0.9, 1.9];
        let hi = [1.0, 2.0, 3.0];
        assert_eq!(interval_chain(&lo, &hi, ChainRule::Transitive), vec![0, 1, 2]);
        assert_eq!(interval_chain(&lo, &hi, ChainRule::Direct), vec![1, 2]);
    }

    #[test]
    fn bound_formulas_by_hand() {
        assert!((two_group_bound(2.0, 0.3, 1.5, 0.2, 0.4, 0.1) - 1.5).abs() < 1e-12);
        assert!((multi_group_bound(2.0, 0.3, 1.0, 1.5, 0.2) - 2.0).abs() < 1e-12);
    }
}
