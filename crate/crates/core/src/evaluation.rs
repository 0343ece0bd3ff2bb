//! Scoring rankings and subsets against a known Markov blanket.

use std::collections::{BTreeMap, BTreeSet};

use crate::elimination::{Direction, EliminationResult, SubsetResult};
use crate::error::{Error, Result};
use crate::synth::MarkovBlanketTruth;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRanking {
    pub ranks: BTreeMap<usize, usize>,
    pub mean_mb_rank: f64,
}

/// Converts an ascending (least important first) order into tied ranks.
///
/// Walking from the most important end, the first variable gets rank 1 and
/// each following variable keeps the previous rank when both it and its
/// predecessor are blanket members; otherwise the rank goes up by one. So
/// an unbroken run of blanket members at the top scores a mean rank of 1.
pub fn normalize_ranks(ascending: &[usize], truth: &MarkovBlanketTruth) -> Result<NormalizedRanking> {
    if truth.mb.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let seen: BTreeSet<usize> = ascending.iter().copied().collect();
    if seen.len() != ascending.len() {
        return Err(Error::BadOrder("repeated variable".into()));
    }
    if seen.contains(&truth.target) {
        return Err(Error::BadOrder(format!("contains the target {}", truth.target)));
    }
    if let Some(missing) = truth.mb.iter().find(|v| !seen.contains(v)) {
        return Err(Error::BadOrder(format!("blanket member {missing} missing")));
    }

    let mut ranks = BTreeMap::new();
    let mut rank = 0;
    let mut prev_in_mb = false;
    for (pos, &v) in ascending.iter().rev().enumerate() {
        let in_mb = truth.contains(v);
        if pos == 0 || !(in_mb && prev_in_mb) {
            rank += 1;
        }
        ranks.insert(v, rank);
        prev_in_mb = in_mb;
    }
    let mean_mb_rank = truth.mb.iter().map(|v| ranks[v] as f64).sum::<f64>() / truth.mb.len() as f64;
    Ok(NormalizedRanking { ranks, mean_mb_rank })
}

/// The `k` most important variables of a ranking.
pub fn clip_ranking(result: &EliminationResult, k: usize) -> Result<SubsetResult> {
    let order = result.order();
    if k > order.len() {
        return Err(Error::BadK { k, len: order.len() });
    }
    let top = match result.direction() {
        Direction::Backward => &order[order.len() - k..],
        Direction::Forward => &order[..k],
    };
    Ok(SubsetResult::new(top.iter().copied()))
}

/// Jaccard index between a subset and the true blanket, times 100.
pub fn accuracy(subset: &SubsetResult, truth: &MarkovBlanketTruth) -> Result<f64> {
    let union = subset.members.union(&truth.mb).count();
    if union == 0 {
        return Err(Error::UndefinedScore);
    }
    let inter = subset.members.intersection(&truth.mb).count();
    Ok(inter as f64 / union as f64 * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub ci95_half_width: f64,
}

/// Mean and normal-approximation 95% half-width `1.96 · sd / √m`, with the
/// sample standard deviation.
pub fn aggregate(scores: &[f64]) -> Result<Summary> {
    let m = scores.len();
    if m < 2 {
        return Err(Error::TooFewTrials(m));
    }
    let mf = m as f64;
    let mean = scores.iter().sum::<f64>() / mf;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (mf - 1.0);
    Ok(Summary { mean, ci95_half_width: 1.96 * var.sqrt() / mf.sqrt() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub grid_value: f64,
    pub scores: Vec<f64>,
    pub mean: f64,
    pub ci95_half_width: f64,
}

impl TrialSummary {
    pub fn new(grid_value: f64, scores: Vec<f64>) -> Result<Self> {
        let Summary { mean, ci95_half_width } = aggregate(&scores)?;
        Ok(Self { grid_value, scores, mean, ci95_half_width })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn truth(target: usize, mb: &[usize]) -> MarkovBlanketTruth {
        MarkovBlanketTruth::new(target, mb.iter().copied()).unwrap()
    }

    #[test]
    fn worked_example() {
        let t = truth(0, &[2, 3, 4]);
        let order = [6, 3, 5, 4, 2, 1];
        let r = normalize_ranks(&order, &t).unwrap();
        let positional: Vec<usize> = order.iter().map(|v| r.ranks[v]).collect();
        assert_eq!(positional, vec![5, 4, 3, 2, 2, 1]);
        assert_abs_diff_eq!(r.mean_mb_rank, 8.0 / 3.0, epsilon = 1e-12);

        let result = EliminationResult::new(order.to_vec(), vec![0.0; 6], Direction::Backward).unwrap();
        let clipped = clip_ranking(&result, 3).unwrap();
        assert_eq!(clipped, SubsetResult::new([4, 2, 1]));
        assert_eq!(accuracy(&clipped, &t).unwrap(), 50.0);
    }

    #[test]
    fn all_members_rank_one() {
        let t = truth(0, &[1, 2, 3]);
        let r = normalize_ranks(&[3, 1, 2], &t).unwrap();
        assert!(r.ranks.values().all(|&k| k == 1));
        assert_eq!(r.mean_mb_rank, 1.0);
    }

    #[test]
    fn single_member_eliminated_last() {
        let t = truth(0, &[1]);
        let r = normalize_ranks(&[2, 3, 1], &t).unwrap();
        assert_eq!((r.ranks[&1], r.ranks[&3], r.ranks[&2]), (1, 2, 3));
        assert_eq!(r.mean_mb_rank, 1.0);
    }

    #[test]
    fn non_member_runs_increment() {
        let t = truth(0, &[1]);
        let r = normalize_ranks(&[1, 2, 3], &t).unwrap();
        assert_eq!(r.ranks[&3], 1);
        assert_eq!(r.ranks[&1], 3);
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(normalize_ranks(&[1, 2], &truth(0, &[])).unwrap_err(), Error::EmptyTruth);
        assert!(matches!(normalize_ranks(&[1, 1], &truth(0, &[1])), Err(Error::BadOrder(_))));
        assert!(matches!(normalize_ranks(&[0, 1], &truth(0, &[1])), Err(Error::BadOrder(_))));
        assert!(matches!(normalize_ranks(&[2, 3], &truth(0, &[1])), Err(Error::BadOrder(_))));
    }

    #[test]
    fn clipping() {
        let fwd = EliminationResult::new(vec![1, 2, 3], vec![0.0; 3], Direction::Forward).unwrap();
        assert_eq!(clip_ranking(&fwd, 2).unwrap(), SubsetResult::new([1, 2]));
        assert_eq!(clip_ranking(&fwd, 3).unwrap(), SubsetResult::new([1, 2, 3]));
        assert_eq!(clip_ranking(&fwd, 4).unwrap_err(), Error::BadK { k: 4, len: 3 });
    }

    #[test]
    fn accuracy_cases() {
        let t = truth(0, &[2, 3, 4]);
        assert_eq!(accuracy(&SubsetResult::new([2, 3, 4]), &t).unwrap(), 100.0);
        assert_eq!(accuracy(&SubsetResult::new([5, 6]), &t).unwrap(), 0.0);
        assert_eq!(accuracy(&SubsetResult::new([]), &t).unwrap(), 0.0);
        assert_eq!(accuracy(&SubsetResult::new([]), &truth(0, &[])).unwrap_err(), Error::UndefinedScore);
    }

    #[test]
    fn aggregate_cases() {
        let s = aggregate(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((s.mean, s.ci95_half_width), (4.0, 0.0));
        let s = aggregate(&[0.0, 100.0]).unwrap();
        assert_eq!(s.mean, 50.0);
        assert_abs_diff_eq!(s.ci95_half_width, 98.0, epsilon = 0.01);
        let s = aggregate(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_abs_diff_eq!(s.ci95_half_width, 1.96 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.ci95_half_width, 1.13, epsilon = 0.005);
        assert_eq!(aggregate(&[1.0]).unwrap_err(), Error::TooFewTrials(1));
    }

    #[test]
    fn trial_summary_bounds() {
        let s = TrialSummary::new(50.0, vec![3.0, 1.0, 2.0]).unwrap();
        assert!(s.mean >= 1.0 && s.mean <= 3.0);
        assert!(s.ci95_half_width >= 0.0);
    }
}
