//! Synthetic linear-Gaussian datasets with a known Markov blanket.
//!
//! Column layout is `[P1, P2, S1, S2, C1, C2, Y, E1..Ek]`:
//!
//! ```text
//! P1  P2      S1   S2
//!   \ /        |    |
//!    Y ------> C1   |
//!    \--------------C2
//! ```
//!
//! Roots and extraneous columns are standard normal. `Y = w·(P1 + P2) + e`
//! and `Ci = w·(Si + Y) + e` with `e ~ N(0, noise_sd²)`. Extra edges of
//! weight 1 only run forwards along `P1, P2, S1, S2, C1, C2, E1..Ek`, so they
//! never make an extraneous column a parent of a child and the blanket
//! `{P1, P2, S1, S2, C1, C2}` is unchanged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{ColumnKind, DataMatrix};
use crate::error::{Error, Result};

pub const TARGET_COLUMN: usize = 6;
/// Sample size used by every sweep except the sample-size sweep.
pub const FIXED_SWEEP_SAMPLES: usize = 70;

// separates the edge-sampling stream from the value stream
const EDGE_STREAM: u64 = 0x5EED_ED6E;

const P1: usize = 0;
const P2: usize = 1;
const S1: usize = 2;
const S2: usize = 3;
const C1: usize = 4;
const C2: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpousesPerChild {
    /// `S1 → C1`, `S2 → C2`.
    #[default]
    One,
    /// Both spouses feed both children.
    Both,
}

impl FromStr for SpousesPerChild {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Self::One),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidConfig(format!("spouses_per_child must be one|both, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub noise_sd: f64,
    pub n_extraneous: usize,
    pub extra_edges: usize,
    pub mb_weight: f64,
    pub seed: u64,
    pub spouses_per_child: SpousesPerChild,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 500,
            noise_sd: 1.0,
            n_extraneous: 10,
            extra_edges: 0,
            mb_weight: 1.0,
            seed: 0,
            spouses_per_child: SpousesPerChild::One,
        }
    }
}

impl SynthConfig {
    pub fn n_columns(&self) -> usize {
        7 + self.n_extraneous
    }

    /// Number of forward pairs available to extra edges.
    pub fn max_extra_edges(&self) -> usize {
        let m = self.n_columns() - 1;
        m * (m - 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig(format!("n_samples must be >= 2, got {}", self.n_samples)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise_sd must be >= 0, got {}", self.noise_sd)));
        }
        if !self.mb_weight.is_finite() {
            return Err(Error::InvalidConfig("mb_weight must be finite".into()));
        }
        if self.extra_edges > self.max_extra_edges() {
            return Err(Error::InvalidConfig(format!(
                "{} extra edges requested but only {} forward pairs exist",
                self.extra_edges,
                self.max_extra_edges()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Parent,
    Child,
    Spouse,
    Extraneous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovBlanketTruth {
    pub target: usize,
    pub mb: BTreeSet<usize>,
    /// May be empty when roles are unknown (e.g. truth loaded from a file).
    pub roles: BTreeMap<usize, Role>,
}

impl MarkovBlanketTruth {
    pub fn new(target: usize, mb: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mb: BTreeSet<usize> = mb.into_iter().collect();
        if mb.contains(&target) {
            return Err(Error::TargetInConditioning(target));
        }
        Ok(Self { target, mb, roles: BTreeMap::new() })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mb.contains(&v)
    }
}

pub fn column_names(n_extraneous: usize) -> Vec<String> {
    let fixed = ["P1", "P2", "S1", "S2", "C1", "C2", "Y"].map(String::from);
    fixed.into_iter().chain((1..=n_extraneous).map(|j| format!("E{j}"))).collect()
}

/// Non-target columns in the order extra edges must respect.
fn topological_order(n_extraneous: usize) -> Vec<usize> {
    (0..6).chain(7..7 + n_extraneous).collect()
}

fn sample_extra_edges(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<(usize, usize)> {
    let order = topological_order(cfg.n_extraneous);
    let pairs: Vec<(usize, usize)> = (0..order.len())
        .flat_map(|a| ((a + 1)..order.len()).map(move |b| (a, b)))
        .map(|(a, b)| (order[a], order[b]))
        .collect();
    let mut picked: Vec<(usize, usize)> =
        sample(rng, pairs.len(), cfg.extra_edges).into_iter().map(|i| pairs[i]).collect();
    picked.sort_unstable();
    picked
}

pub fn gen_mb_dataset(cfg: &SynthConfig) -> Result<(DataMatrix, MarkovBlanketTruth)> {
    cfg.validate()?;
    let n = cfg.n_samples;
    let d = cfg.n_columns();
    let edges = sample_extra_edges(&mut ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ EDGE_STREAM)), cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // exogenous draws, one column at a time
    let mut cols: Vec<Vec<f64>> =
        (0..d).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); d];
    for &(u, v) in &edges {
        parents[v].push(u);
    }
    let add_inflow = |cols: &mut Vec<Vec<f64>>, v: usize| {
        for &u in &parents[v] {
            for i in 0..n {
                let x = cols[u][i];
                cols[v][i] += x;
            }
        }
    };

    let w = cfg.mb_weight;
    let sd = cfg.noise_sd;
    for v in [P1, P2, S1, S2] {
        add_inflow(&mut cols, v);
    }
    for i in 0..n {
        cols[TARGET_COLUMN][i] = w * (cols[P1][i] + cols[P2][i]) + sd * cols[TARGET_COLUMN][i];
    }
    for (child, spouse) in [(C1, S1), (C2, S2)] {
        for i in 0..n {
            let spouses = match cfg.spouses_per_child {
                SpousesPerChild::One => cols[spouse][i],
                SpousesPerChild::Both => cols[S1][i] + cols[S2][i],
            };
            cols[child][i] = w * (spouses + cols[TARGET_COLUMN][i]) + sd * cols[child][i];
        }
        add_inflow(&mut cols, child);
    }
    for v in 7..d {
        add_inflow(&mut cols, v);
    }

    let values = DMatrix::from_fn(n, d, |i, j| cols[j][i]);
    let data = DataMatrix::new(values, column_names(cfg.n_extraneous), vec![ColumnKind::Continuous; d])?;

    let mut roles = BTreeMap::new();
    for (v, role) in [
        (P1, Role::Parent),
        (P2, Role::Parent),
        (S1, Role::Spouse),
        (S2, Role::Spouse),
        (C1, Role::Child),
        (C2, Role::Child),
    ] {
        roles.insert(v, role);
    }
    for v in 7..d {
        roles.insert(v, Role::Extraneous);
    }
    let truth = MarkovBlanketTruth { target: TARGET_COLUMN, mb: (0..6).collect(), roles };
    Ok((data, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Samples,
    Noise,
    Edges,
    Extraneous,
    Weights,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Samples => "samples",
            Experiment::Noise => "noise",
            Experiment::Edges => "edges",
            Experiment::Extraneous => "extraneous",
            Experiment::Weights => "weights",
        }
    }

    /// Applies a grid value to `cfg`.
    pub fn apply(self, cfg: &SynthConfig, value: f64) -> Result<SynthConfig> {
        let count = |what: &str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{what} grid value must be a non-negative integer, got {value}")))
            }
        };
        let mut out = *cfg;
        match self {
            Experiment::Samples => out.n_samples = count("samples")?,
            Experiment::Noise => out.noise_sd = value,
            Experiment::Edges => out.extra_edges = count("edges")?,
            Experiment::Extraneous => out.n_extraneous = count("extraneous")?,
            Experiment::Weights => out.mb_weight = value,
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "samples" => Ok(Experiment::Samples),
            "noise" => Ok(Experiment::Noise),
            "edges" => Ok(Experiment::Edges),
            "extraneous" => Ok(Experiment::Extraneous),
            "weights" => Ok(Experiment::Weights),
            other => Err(Error::BadExperiment(other.to_string())),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one `(grid point, trial)` cell. Distinct cells get distinct
/// seeds for any base seed.
pub fn trial_seed(base: u64, grid_index: usize, trial: usize) -> u64 {
    let cell = ((grid_index as u64) << 32) | (trial as u64 & 0xFFFF_FFFF);
    splitmix64(base.wrapping_add(splitmix64(cell)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrial {
    pub trial: usize,
    pub seed: u64,
    pub config: SynthConfig,
}

impl SweepTrial {
    pub fn generate(&self) -> Result<(DataMatrix, MarkovBlanketTruth)> {
        gen_mb_dataset(&self.config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub trials: Vec<SweepTrial>,
}

impl SweepPoint {
    pub fn seeds(&self) -> Vec<u64> {
        self.trials.iter().map(|t| t.seed).collect()
    }

    pub fn datasets(&self) -> Result<Vec<(DataMatrix, MarkovBlanketTruth)>> {
        self.trials.iter().map(SweepTrial::generate).collect()
    }
}

/// Trial configurations for one experiment. Every experiment other than
/// [`Experiment::Samples`] runs at `fixed_samples` rows when given, which
/// [`sweep`] sets to [`FIXED_SWEEP_SAMPLES`].
pub fn sweep_plan(
    experiment: Experiment,
    grid: &[f64],
    base: &SynthConfig,
    trials: usize,
    fixed_samples: Option<usize>,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty grid".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    let mut base = *base;
    if experiment != Experiment::Samples {
        if let Some(n) = fixed_samples {
            base.n_samples = n;
        }
    }
    grid.iter()
        .enumerate()
        .map(|(g, &value)| {
            let cfg = experiment.apply(&base, value)?;
            let trials = (0..trials)
                .map(|t| {
                    let seed = trial_seed(base.seed, g, t);
                    SweepTrial { trial: t, seed, config: SynthConfig { seed, ..cfg } }
                })
                .collect();
            Ok(SweepPoint { value, trials })
        })
        .collect()
}

pub fn sweep(experiment: Experiment, grid: &[f64], base: &SynthConfig, trials: usize) -> Result<Vec<SweepPoint>> {
    sweep_plan(experiment, grid, base, trials, Some(FIXED_SWEEP_SAMPLES))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let (data, truth) = gen_mb_dataset(&SynthConfig::default()).unwrap();
        assert_eq!(data.n_vars(), 17);
        assert_eq!(data.n_samples(), 500);
        assert_eq!(truth.mb.len(), 6);
        assert_eq!(truth.target, TARGET_COLUMN);
        assert_eq!(data.names()[TARGET_COLUMN], "Y");
        assert_eq!(truth.roles[&S1], Role::Spouse);
        assert_eq!(truth.roles[&16], Role::Extraneous);
    }

    #[test]
    fn zero_noise_identities_hold_exactly() {
        for spouses in [SpousesPerChild::One, SpousesPerChild::Both] {
            let cfg = SynthConfig { n_samples: 50, noise_sd: 0.0, mb_weight: 1.5, seed: 9, spouses_per_child: spouses, ..Default::default() };
            let (data, _) = gen_mb_dataset(&cfg).unwrap();
            let c = |j: usize| data.column(j).to_vec();
            let (p1, p2, s1, s2, c1, c2, y) = (c(P1), c(P2), c(S1), c(S2), c(C1), c(C2), c(TARGET_COLUMN));
            for i in 0..50 {
                assert_eq!(y[i] - 1.5 * (p1[i] + p2[i]), 0.0);
                let (sp1, sp2) = match spouses {
                    SpousesPerChild::One => (s1[i], s2[i]),
                    SpousesPerChild::Both => (s1[i] + s2[i], s1[i] + s2[i]),
                };
                assert_eq!(c1[i] - 1.5 * (sp1 + y[i]), 0.0);
                assert_eq!(c2[i] - 1.5 * (sp2 + y[i]), 0.0);
            }
        }
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let cfg = SynthConfig { extra_edges: 30, seed: 42, n_samples: 40, ..Default::default() };
        let (a, _) = gen_mb_dataset(&cfg).unwrap();
        let (b, _) = gen_mb_dataset(&cfg).unwrap();
        assert_eq!(a, b);
        let (c, _) = gen_mb_dataset(&SynthConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn minimum_rows() {
        let (data, _) = gen_mb_dataset(&SynthConfig { n_samples: 2, ..Default::default() }).unwrap();
        assert_eq!(data.n_samples(), 2);
        assert!(gen_mb_dataset(&SynthConfig { n_samples: 1, ..Default::default() }).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SynthConfig { noise_sd: -1.0, ..Default::default() }.validate().is_err());
        assert!(SynthConfig { mb_weight: f64::INFINITY, ..Default::default() }.validate().is_err());
        let cfg = SynthConfig::default();
        assert_eq!(cfg.max_extra_edges(), 120);
        assert!(SynthConfig { extra_edges: 121, ..cfg }.validate().is_err());
        assert!(SynthConfig { extra_edges: 120, ..cfg }.validate().is_ok());
    }

    #[test]
    fn extra_edges_respect_order() {
        let cfg = SynthConfig { extra_edges: 100, seed: 5, ..Default::default() };
        let edges = sample_extra_edges(&mut ChaCha8Rng::seed_from_u64(cfg.seed), &cfg);
        assert_eq!(edges.len(), 100);
        let order = topological_order(cfg.n_extraneous);
        let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
        for &(u, v) in &edges {
            assert!(pos(u) < pos(v));
            assert_ne!(v, TARGET_COLUMN);
            // no column outside the blanket feeds a child
            if v == C1 || v == C2 {
                assert!(u < 6);
            }
        }
    }

    #[test]
    fn extra_edges_add_parent_columns() {
        // all 21 forward pairs over 7 non-target columns
        let cfg = SynthConfig { n_samples: 5, n_extraneous: 1, extra_edges: 21, seed: 3, ..Default::default() };
        let (data, truth) = gen_mb_dataset(&cfg).unwrap();
        let (plain, _) = gen_mb_dataset(&SynthConfig { extra_edges: 0, ..cfg }).unwrap();
        assert_eq!(data.column(P1), plain.column(P1));
        for i in 0..5 {
            assert_eq!(data.column(P2)[i], plain.column(P2)[i] + data.column(P1)[i]);
            let mut e1 = plain.column(7)[i];
            for u in 0..6 {
                e1 += data.column(u)[i];
            }
            assert_eq!(data.column(7)[i], e1);
        }
        assert_eq!(truth.mb, (0..6).collect());
    }

    #[test]
    fn sweep_cardinality_and_seeds() {
        let grid: Vec<f64> = (1..=10).map(|k| 50.0 * k as f64).collect();
        let points = sweep(Experiment::Samples, &grid, &SynthConfig::default(), 30).unwrap();
        assert_eq!(points.len(), 10);
        assert!(points.iter().all(|p| p.trials.len() == 30));
        let seeds: BTreeSet<u64> = points.iter().flat_map(|p| p.seeds()).collect();
        assert_eq!(seeds.len(), 300);
        assert_eq!(points[3].trials[0].config.n_samples, 200);
    }

    #[test]
    fn non_sample_sweeps_fix_sample_size() {
        let points = sweep(Experiment::Noise, &[0.0, 2.5, 5.0], &SynthConfig::default(), 2).unwrap();
        for p in &points {
            for (data, _) in p.datasets().unwrap() {
                assert_eq!(data.n_samples(), 70);
            }
        }
        assert_eq!(points[1].trials[0].config.noise_sd, 2.5);
        let kept = sweep_plan(Experiment::Noise, &[1.0], &SynthConfig::default(), 1, None).unwrap();
        assert_eq!(kept[0].trials[0].config.n_samples, 500);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = sweep(Experiment::Edges, &[0.0, 20.0], &SynthConfig { seed: 11, ..Default::default() }, 3).unwrap();
        let b = sweep(Experiment::Edges, &[0.0, 20.0], &SynthConfig { seed: 11, ..Default::default() }, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].datasets().unwrap(), b[1].datasets().unwrap());
    }

    #[test]
    fn sweep_errors() {
        assert_eq!("bogus".parse::<Experiment>().unwrap_err(), Error::BadExperiment("bogus".into()));
        assert!(sweep(Experiment::Samples, &[], &SynthConfig::default(), 1).is_err());
        assert!(sweep(Experiment::Samples, &[10.0], &SynthConfig::default(), 0).is_err());
        assert!(sweep(Experiment::Edges, &[2.5], &SynthConfig::default(), 1).is_err());
    }
}
