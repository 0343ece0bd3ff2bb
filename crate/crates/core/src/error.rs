use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("empty variable subset")]
    EmptySubset,

    #[error("column index {index} out of range for {columns} columns")]
    BadColumn { index: usize, columns: usize },

    #[error("gram matrix is already centered")]
    AlreadyCentered,

    #[error("gram matrix must be centered")]
    NotCentered,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    #[error("target index {target} invalid for {columns} columns")]
    BadTarget { target: usize, columns: usize },

    #[error("target {0} appears in the conditioning set")]
    TargetInConditioning(usize),

    #[error("{0} is not a conditional dependence measure")]
    NotConditional(&'static str),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("singular conditioning correlation matrix")]
    SingularConditioning,

    #[error("too few samples: n = {n}, conditioning set size = {cond}")]
    TooFewSamples { n: usize, cond: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("markov blanket truth is empty")]
    EmptyTruth,

    #[error("order is not a permutation of the non-target variables: {0}")]
    BadOrder(String),

    #[error("k = {k} out of range 0..={len}")]
    BadK { k: usize, len: usize },

    #[error("score undefined for two empty sets")]
    UndefinedScore,

    #[error("need at least 2 scores, got {0}")]
    TooFewTrials(usize),

    #[error("unknown experiment `{0}`")]
    BadExperiment(String),

    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
