//! Greedy variable ranking against a target.
//!
//! [`backward_eliminate`] starts from every non-target variable in the
//! conditioning set and repeatedly drops the variable whose removal leaves
//! the conditional dependence measure smallest, so Markov blanket members
//! tend to be dropped last. [`forward_select`] grows the set instead, and
//! [`bahsic_eliminate`] is the unconditional HSIC baseline.
//!
//! Ties are broken towards the lowest variable index.

use std::collections::BTreeSet;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::measures::{MeasureContext, MeasureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `order` runs from least to most important.
    Backward,
    /// `order` runs from most to least important.
    Forward,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Backward => "backward",
            Direction::Forward => "forward",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationResult {
    order: Vec<usize>,
    step_values: Vec<f64>,
    direction: Direction,
}

impl EliminationResult {
    pub fn new(order: Vec<usize>, step_values: Vec<f64>, direction: Direction) -> Result<Self> {
        if order.len() != step_values.len() {
            return Err(Error::DimensionMismatch(order.len(), step_values.len()));
        }
        let unique: BTreeSet<_> = order.iter().collect();
        if unique.len() != order.len() {
            return Err(Error::BadOrder("repeated variable".into()));
        }
        Ok(Self { order, step_values, direction })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn step_values(&self) -> &[f64] {
        &self.step_values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Variables from least to most important.
    pub fn ascending(&self) -> Vec<usize> {
        match self.direction {
            Direction::Backward => self.order.clone(),
            Direction::Forward => self.order.iter().rev().copied().collect(),
        }
    }

    /// Variables from most to least important.
    pub fn descending(&self) -> Vec<usize> {
        let mut v = self.ascending();
        v.reverse();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubsetResult {
    pub members: BTreeSet<usize>,
}

impl SubsetResult {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self { members: members.into_iter().collect() }
    }
}

fn non_targets(data: &DataMatrix, target: usize) -> Result<Vec<usize>> {
    data.check_target(target)?;
    let vars: Vec<usize> = (0..data.n_vars()).filter(|&j| j != target).collect();
    if vars.is_empty() {
        return Err(Error::InvalidData("no non-target variables".into()));
    }
    Ok(vars)
}

fn require_conditional(kind: MeasureKind) -> Result<()> {
    if kind.is_conditional() {
        Ok(())
    } else {
        Err(Error::NotConditional(kind.name()))
    }
}

/// Number of variables dropped from a conditioning set of size `remaining`.
///
/// `beta = 0` drops exactly one. For `beta` in `(0, 1)` a fraction `1 − beta`
/// of the set is dropped per iteration, rounded up and at least one, so
/// `beta = 0.5` halves the set each time.
pub fn removal_count(beta: f64, remaining: usize) -> usize {
    if beta == 0.0 {
        return 1.min(remaining);
    }
    let count = ((1.0 - beta) * remaining as f64).ceil() as usize;
    count.clamp(1, remaining.max(1))
}

/// Measure value with each variable of `set` held out in turn, paired with
/// the held-out variable.
pub fn held_out_values(ctx: &MeasureContext<'_>, set: &[usize], spec: &KernelSpec) -> Result<Vec<(usize, f64)>> {
    let mut rest = Vec::with_capacity(set.len().saturating_sub(1));
    set.iter()
        .map(|&v| {
            rest.clear();
            rest.extend(set.iter().copied().filter(|&u| u != v));
            ctx.value_with(&rest, spec).map(|value| (v, value))
        })
        .collect()
}

fn by_value_then_index(a: &(usize, f64), b: &(usize, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Backward elimination ranking with a conditional measure (`M1` or `M2`).
///
/// The Gaussian median bandwidth is resolved once per iteration from the
/// current conditioning set. See [`removal_count`] for `beta`.
pub fn backward_eliminate(
    data: &DataMatrix,
    target: usize,
    kind: MeasureKind,
    spec: &KernelSpec,
    beta: f64,
) -> Result<EliminationResult> {
    require_conditional(kind)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1), got {beta}")));
    }
    let mut remaining = non_targets(data, target)?;
    let ctx = MeasureContext::new(data, target, kind, spec)?;
    let mut order = Vec::with_capacity(remaining.len());
    let mut values = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let iter_spec = spec.resolved_for(data, &remaining)?;
        let mut scores = held_out_values(&ctx, &remaining, &iter_spec)?;
        scores.sort_by(by_value_then_index);
        let count = removal_count(beta, remaining.len());
        for &(v, value) in &scores[..count] {
            order.push(v);
            values.push(value);
        }
        let removed: BTreeSet<usize> = scores[..count].iter().map(|s| s.0).collect();
        remaining.retain(|v| !removed.contains(v));
    }
    EliminationResult::new(order, values, Direction::Backward)
}

/// Greedy forward selection: each step adds the variable whose inclusion
/// minimizes the measure. `stop_at = None` runs through every variable.
pub fn forward_select(
    data: &DataMatrix,
    target: usize,
    kind: MeasureKind,
    spec: &KernelSpec,
    stop_at: Option<usize>,
) -> Result<EliminationResult> {
    require_conditional(kind)?;
    let mut remaining = non_targets(data, target)?;
    let steps = match stop_at {
        None => remaining.len(),
        Some(t) if (1..=remaining.len()).contains(&t) => t,
        Some(t) => return Err(Error::BadK { k: t, len: remaining.len() }),
    };
    let ctx = MeasureContext::new(data, target, kind, spec)?;
    let mut selected: Vec<usize> = Vec::with_capacity(steps);
    let mut values = Vec::with_capacity(steps);
    let mut trial = Vec::with_capacity(steps);
    while selected.len() < steps {
        let mut best: Option<(usize, f64)> = None;
        for &v in &remaining {
            trial.clear();
            trial.extend_from_slice(&selected);
            trial.push(v);
            let value = ctx.value(&trial)?;
            if best.map_or(true, |b| by_value_then_index(&(v, value), &b).is_lt()) {
                best = Some((v, value));
            }
        }
        let (v, value) = best.expect("remaining is non-empty");
        selected.push(v);
        values.push(value);
        remaining.retain(|&u| u != v);
    }
    EliminationResult::new(selected, values, Direction::Forward)
}

/// HSIC backward elimination: each step drops the variable whose removal
/// keeps HSIC between the remaining features and the target largest.
pub fn bahsic_eliminate(data: &DataMatrix, target: usize, spec: &KernelSpec) -> Result<EliminationResult> {
    let mut remaining = non_targets(data, target)?;
    let ctx = MeasureContext::new(data, target, MeasureKind::Hsic, spec)?;
    let mut order = Vec::with_capacity(remaining.len());
    let mut values = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let iter_spec = spec.resolved_for(data, &remaining)?;
        let scores = held_out_values(&ctx, &remaining, &iter_spec)?;
        let &(v, value) = scores
            .iter()
            .min_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)))
            .expect("remaining is non-empty");
        order.push(v);
        values.push(value);
        remaining.retain(|&u| u != v);
    }
    EliminationResult::new(order, values, Direction::Backward)
}
