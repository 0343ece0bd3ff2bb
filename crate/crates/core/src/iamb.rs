//! Incremental association Markov blanket search with Fisher's z test on
//! partial correlations.

use nalgebra::{Cholesky, DMatrix};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::DataMatrix;
use crate::elimination::SubsetResult;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

const SINGULAR_PIVOT: f64 = 1e-12;

/// Fisher z statistic `atanh(r) · √(n − |Z| − 3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherZ {
    pub statistic: f64,
}

impl FisherZ {
    /// Two-sided test against the standard normal quantile.
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.statistic.abs() > critical_value(alpha)
    }
}

fn critical_value(alpha: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - alpha / 2.0)
}

pub fn fisher_z(partial_corr: f64, n: usize, cond_size: usize) -> Result<FisherZ> {
    if !(-1.0..=1.0).contains(&partial_corr) {
        return Err(Error::InvalidArgument(format!("correlation {partial_corr} outside [-1, 1]")));
    }
    if n <= cond_size + 3 {
        return Err(Error::TooFewSamples { n, cond: cond_size });
    }
    let dof = (n - cond_size - 3) as f64;
    let r = partial_corr;
    let statistic = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * dof.sqrt();
    Ok(FisherZ { statistic })
}

/// Pearson correlation matrix; constant columns are uncorrelated with
/// everything else.
pub fn correlation_matrix(data: &DataMatrix) -> DMatrix<f64> {
    let n = data.n_samples() as f64;
    let d = data.n_vars();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let col = data.column(j);
            let mean = col.iter().sum::<f64>() / n;
            col.iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if norms[i] == 0.0 || norms[j] == 0.0 {
            0.0
        } else {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
        }
    })
}

/// Partial correlation of `x` and `y` given `cond`, read off the inverse of
/// the correlation submatrix over `[x, y, cond...]`.
pub fn partial_correlation(corr: &DMatrix<f64>, x: usize, y: usize, cond: &[usize]) -> Result<f64> {
    if cond.is_empty() {
        return Ok(corr[(x, y)]);
    }
    let idx: Vec<usize> = [x, y].into_iter().chain(cond.iter().copied()).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| corr[(idx[i], idx[j])]);
    let chol = Cholesky::new(sub).ok_or(Error::SingularConditioning)?;
    // unit diagonal, so squared pivots are the fractions of variance left unexplained
    if chol.l_dirty().diagonal().iter().any(|p| p * p < SINGULAR_PIVOT) {
        return Err(Error::SingularConditioning);
    }
    let precision = chol.inverse();
    let denom = (precision[(0, 0)] * precision[(1, 1)]).sqrt();
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::SingularConditioning);
    }
    Ok((-precision[(0, 1)] / denom).clamp(-1.0, 1.0))
}

/// Outcome of an IAMB run with bookkeeping about tests that could not be
/// carried out.
#[derive(Debug, Clone, PartialEq)]
pub struct IambReport {
    pub subset: SubsetResult,
    /// Tests skipped because the conditioning correlation matrix was
    /// singular or the sample was too small; each counted as independence.
    pub failed_tests: usize,
    pub rounds: usize,
}

struct Tester {
    corr: DMatrix<f64>,
    n: usize,
    target: usize,
    alpha: f64,
    failed: usize,
}

impl Tester {
    /// `None` when the test cannot be run.
    fn z(&mut self, x: usize, cond: &[usize]) -> Option<FisherZ> {
        let z = partial_correlation(&self.corr, x, self.target, cond).and_then(|r| fisher_z(r, self.n, cond.len()));
        match z {
            Ok(z) => Some(z),
            Err(_) => {
                self.failed += 1;
                None
            }
        }
    }

    fn significant(&mut self, x: usize, cond: &[usize]) -> bool {
        let alpha = self.alpha;
        self.z(x, cond).is_some_and(|z| z.significant_at(alpha))
    }
}

/// Grow-shrink Markov blanket search. The grow phase adds the candidate with
/// the largest absolute partial correlation to the target while it is
/// significant; the shrink phase drops the weakest member while any member
/// is non-significant given the others. Both phases alternate until neither
/// changes the set.
pub fn iamb(data: &DataMatrix, target: usize, alpha: f64) -> Result<SubsetResult> {
    iamb_report(data, target, alpha).map(|r| r.subset)
}

pub fn iamb_report(data: &DataMatrix, target: usize, alpha: f64) -> Result<IambReport> {
    data.check_target(target)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let d = data.n_vars();
    let mut t = Tester { corr: correlation_matrix(data), n: data.n_samples(), target, alpha, failed: 0 };
    let mut blanket: Vec<usize> = Vec::new();
    let max_rounds = 2 * d + 2;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;

        // grow
        loop {
            let mut best: Option<(usize, f64)> = None;
            for x in (0..d).filter(|&x| x != target && !blanket.contains(&x)) {
                if let Some(z) = t.z(x, &blanket) {
                    let s = z.statistic.abs();
                    if best.map_or(true, |(_, b)| s > b) {
                        best = Some((x, s));
                    }
                }
            }
            match best {
                Some((x, s)) if s > critical_value(alpha) => {
                    blanket.push(x);
                    changed = true;
                }
                _ => break,
            }
        }

        // shrink
        loop {
            let mut weakest: Option<(usize, f64)> = None;
            for (pos, &x) in blanket.iter().enumerate() {
                let rest: Vec<usize> = blanket.iter().copied().filter(|&u| u != x).collect();
                let s = t.z(x, &rest).map_or(0.0, |z| z.statistic.abs());
                if weakest.map_or(true, |(_, w)| s < w) {
                    weakest = Some((pos, s));
                }
            }
            match weakest {
                Some((pos, s)) if s <= critical_value(alpha) => {
                    blanket.remove(pos);
                    changed = true;
                }
                _ => break,
            }
        }

        if !changed || rounds >= max_rounds {
            break;
        }
    }
    let subset = SubsetResult::new(blanket);
    Ok(IambReport { subset, failed_tests: t.failed, rounds })
}

/// Checks the fixed-point property of an IAMB output: each member is
/// significant given the other members and each excluded variable is not
/// significant given the members.
pub fn is_iamb_consistent(data: &DataMatrix, target: usize, alpha: f64, subset: &SubsetResult) -> bool {
    let mut t = Tester { corr: correlation_matrix(data), n: data.n_samples(), target, alpha, failed: 0 };
    let members: Vec<usize> = subset.members.iter().copied().collect();
    let members_ok = members.iter().all(|&x| {
        let rest: Vec<usize> = members.iter().copied().filter(|&u| u != x).collect();
        t.significant(x, &rest)
    });
    let outsiders_ok = (0..data.n_vars())
        .filter(|&x| x != target && !subset.members.contains(&x))
        .all(|x| !t.significant(x, &members));
    members_ok && outsiders_ok
}
