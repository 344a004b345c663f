//! Decision rules turning posterior DE probabilities into discovery lists.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// Largest prefix of the descending probabilities whose mean
    /// `1 - p` stays at or below `alpha`.
    Threshold,
    /// `p > 1 - alpha`.
    Naive,
    /// `p > cost / (cost + 1)`.
    Loss(f64),
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionRule::Threshold => write!(f, "threshold"),
            DecisionRule::Naive => write!(f, "naive"),
            DecisionRule::Loss(c) => write!(f, "loss:{c}"),
        }
    }
}

impl std::str::FromStr for DecisionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(DecisionRule::Threshold),
            "naive" => Ok(DecisionRule::Naive),
            _ => {
                let cost = s
                    .strip_prefix("loss:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown decision rule '{s}'")))?;
                if !(cost > 0.0) || !cost.is_finite() {
                    return Err(Error::Config(format!("loss cost must be positive, got {cost}")));
                }
                Ok(DecisionRule::Loss(cost))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub rule: DecisionRule,
    pub alpha: f64,
    pub p_de: Vec<f64>,
    pub decisions: Vec<bool>,
    /// 1-based position in the descending order of `p_de`; `None` for
    /// transcripts excluded by the fold-change filter.
    pub rank: Vec<Option<usize>>,
    pub n_discoveries: usize,
    /// Mean of `1 - p` over the accepted set, 0 when it is empty.
    pub expected_fdr: f64,
}

/// Probability cutoff that minimizes the expected loss when a false
/// discovery costs `cost` times a missed one.
pub fn loss_threshold(cost: f64) -> Result<f64> {
    if !(cost > 0.0) {
        return Err(Error::Parameter(format!("cost must be positive, got {cost}")));
    }
    if cost.is_infinite() {
        return Ok(1.0);
    }
    Ok(cost / (cost + 1.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("alpha = {alpha} not in (0, 1)")))
    }
}

/// Indices of eligible transcripts by descending probability, ties by
/// ascending index.
fn ranking(p: &[f64], eligible: Option<&[bool]>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len())
        .filter(|&k| eligible.is_none_or(|e| e[k]))
        .collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx
}

fn finish(rule: DecisionRule, alpha: f64, p: &[f64], order: &[usize], accepted: usize) -> DecisionReport {
    let mut decisions = vec![false; p.len()];
    let mut rank = vec![None; p.len()];
    for (pos, &k) in order.iter().enumerate() {
        rank[k] = Some(pos + 1);
        decisions[k] = pos < accepted;
    }
    let expected_fdr = if accepted == 0 {
        0.0
    } else {
        order[..accepted].iter().map(|&k| 1.0 - p[k]).sum::<f64>() / accepted as f64
    };
    DecisionReport {
        rule,
        alpha,
        p_de: p.to_vec(),
        decisions,
        rank,
        n_discoveries: accepted,
        expected_fdr,
    }
}

fn check_probs(p: &[f64]) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Parameter(format!("probability {x} outside [0, 1]")));
    }
    Ok(())
}

pub fn fdr_threshold_select(p: &[f64], alpha: f64) -> Result<DecisionReport> {
    apply_rule(p, DecisionRule::Threshold, alpha, None)
}

pub fn naive_rule(p: &[f64], alpha: f64) -> Result<DecisionReport> {
    apply_rule(p, DecisionRule::Naive, alpha, None)
}

/// Applies `rule`; transcripts with `eligible[k] == false` are never
/// accepted and not ranked.
pub fn apply_rule(p: &[f64], rule: DecisionRule, alpha: f64, eligible: Option<&[bool]>) -> Result<DecisionReport> {
    check_alpha(alpha)?;
    check_probs(p)?;
    if eligible.is_some_and(|e| e.len() != p.len()) {
        return Err(Error::Dimension("eligibility mask length differs".into()));
    }
    let order = ranking(p, eligible);
    let accepted = match rule {
        DecisionRule::Threshold => {
            // running means of 1 - q are nondecreasing, so the accepted set is a prefix
            let mut sum = 0.0;
            let mut g = 0;
            for (pos, &k) in order.iter().enumerate() {
                sum += 1.0 - p[k];
                if sum / (pos + 1) as f64 <= alpha {
                    g = pos + 1;
                }
            }
            g
        }
        DecisionRule::Naive => order.iter().take_while(|&&k| p[k] > 1.0 - alpha).count(),
        DecisionRule::Loss(cost) => {
            let cut = loss_threshold(cost)?;
            order.iter().take_while(|&&k| p[k] > cut).count()
        }
    };
    Ok(finish(rule, alpha, p, &order, accepted))
}

/// Eligibility mask of the fold-change filter `|log2 FC| >= t`.
pub fn fold_change_mask(log2fc: &[f64], t: f64) -> Vec<bool> {
    log2fc.iter().map(|x| x.abs() >= t).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_worked_example() {
        let r = fdr_threshold_select(&[0.99, 0.97, 0.90, 0.50], 0.05).unwrap();
        assert_eq!(r.n_discoveries, 3);
        assert_eq!(r.decisions, vec![true, true, true, false]);
        assert!((r.expected_fdr - 0.14 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_edge_cases() {
        let r = fdr_threshold_select(&[1.0; 5], 0.01).unwrap();
        assert_eq!(r.n_discoveries, 5);
        assert_eq!(r.expected_fdr, 0.0);
        let r = fdr_threshold_select(&[0.5, 0.2], 0.05).unwrap();
        assert_eq!(r.n_discoveries, 0);
        assert!(fdr_threshold_select(&[0.5], 0.0).is_err());
        assert!(fdr_threshold_select(&[1.5], 0.1).is_err());
    }

    #[test]
    fn naive_examples() {
        let r = naive_rule(&[0.99, 0.96, 0.90], 0.05).unwrap();
        assert_eq!(r.decisions, vec![true, true, false]);
        let r = naive_rule(&[0.51, 0.5, 0.49], 0.5).unwrap();
        assert_eq!(r.decisions, vec![true, false, false]);
        assert_eq!(naive_rule(&[], 0.05).unwrap().n_discoveries, 0);
    }

    #[test]
    fn loss_cutoffs() {
        assert!((loss_threshold(19.0).unwrap() - 0.95).abs() < 1e-15);
        assert_eq!(loss_threshold(1.0).unwrap(), 0.5);
        assert!(loss_threshold(1e12).unwrap() > 1.0 - 1e-11);
        assert_eq!(loss_threshold(f64::INFINITY).unwrap(), 1.0);
        assert!(loss_threshold(0.0).is_err());
        let r = apply_rule(&[0.96, 0.94], DecisionRule::Loss(19.0), 0.05, None).unwrap();
        assert_eq!(r.decisions, vec![true, false]);
    }

    #[test]
    fn ties_rank_by_index() {
        let r = fdr_threshold_select(&[0.9, 0.99, 0.9, 0.9], 0.5).unwrap();
        assert_eq!(r.rank, vec![Some(2), Some(1), Some(3), Some(4)]);
    }

    #[test]
    fn fold_change_filter() {
        let mask = fold_change_mask(&[2.0, 0.5, -1.5], 1.0);
        let r = apply_rule(&[0.99, 0.99, 0.99], DecisionRule::Threshold, 0.05, Some(&mask)).unwrap();
        assert_eq!(r.decisions, vec![true, false, true]);
        assert_eq!(r.rank[1], None);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("threshold".parse::<DecisionRule>().unwrap(), DecisionRule::Threshold);
        assert_eq!("naive".parse::<DecisionRule>().unwrap(), DecisionRule::Naive);
        assert_eq!("loss:19".parse::<DecisionRule>().unwrap(), DecisionRule::Loss(19.0));
        assert!("loss:-1".parse::<DecisionRule>().is_err());
        assert!("bogus".parse::<DecisionRule>().is_err());
    }

    proptest! {
        #[test]
        fn threshold_guarantee(p in prop::collection::vec(0.0f64..=1.0, 0..60), alpha in 0.001f64..0.999) {
            let r = fdr_threshold_select(&p, alpha).unwrap();
            prop_assert!(r.expected_fdr <= alpha);
            prop_assert_eq!(r.n_discoveries, r.decisions.iter().filter(|&&d| d).count());
        }

        #[test]
        fn monotone_in_alpha(p in prop::collection::vec(0.0f64..=1.0, 0..60), a1 in 0.001f64..0.999, a2 in 0.001f64..0.999) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            for rule in [DecisionRule::Threshold, DecisionRule::Naive] {
                let small = apply_rule(&p, rule, lo, None).unwrap();
                let large = apply_rule(&p, rule, hi, None).unwrap();
                for k in 0..p.len() {
                    prop_assert!(!small.decisions[k] || large.decisions[k]);
                }
            }
        }

        #[test]
        fn naive_subset_of_threshold(p in prop::collection::vec(0.0f64..=1.0, 0..60), alpha in 0.001f64..0.999) {
            let naive = naive_rule(&p, alpha).unwrap();
            let thr = fdr_threshold_select(&p, alpha).unwrap();
            for k in 0..p.len() {
                prop_assert!(!naive.decisions[k] || thr.decisions[k]);
            }
        }
    }
}
