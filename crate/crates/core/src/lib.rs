//! Markov blanket ranking by backward elimination over kernel conditional
//! dependence measures.
//!
//! The main entry point is [`backward_eliminate`], which orders the
//! non-target variables of a [`DataMatrix`] from least to most important
//! for a target column. Baselines ([`bahsic_eliminate`], [`iamb`]), a
//! synthetic data generator with known blankets ([`synth`]) and scoring
//! against ground truth ([`evaluation`]) live alongside it.

pub mod data;
pub mod elimination;
pub mod error;
pub mod evaluation;
pub mod iamb;
pub mod kernel;
mod linalg;
pub mod measures;
pub mod synth;

pub use data::{ColumnKind, DataMatrix};
pub use elimination::{
    backward_eliminate, bahsic_eliminate, forward_select, Direction, EliminationResult, SubsetResult,
};
pub use error::{Error, Result};
pub use evaluation::{accuracy, aggregate, clip_ranking, normalize_ranks, NormalizedRanking, TrialSummary};
pub use iamb::{fisher_z, iamb, FisherZ};
pub use kernel::{center, compute_gram, median_bandwidth, Bandwidth, GramMatrix, KernelFamily, KernelSpec};
pub use measures::{evaluate, hsic, m1, m2, MeasureContext, MeasureKind, TargetFactor};
pub use synth::{gen_mb_dataset, sweep, Experiment, MarkovBlanketTruth, SynthConfig};
