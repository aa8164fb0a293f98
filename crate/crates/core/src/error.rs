use std::path::PathBuf;

use thiserror::Error;

/// Which side of the data a failure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Domain1,
    Domain2,
    Cross,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Block::Domain1 => f.write_str("domain 1"),
            Block::Domain2 => f.write_str("domain 2"),
            Block::Cross => f.write_str("cross-domain graph"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative cross-graph weight at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize },

    #[error("{block} is empty or too small: {reason}")]
    EmptyDomain { block: Block, reason: String },

    #[error("non-finite value in {block} at ({row}, {col})")]
    NonFiniteValue {
        block: Block,
        row: usize,
        col: usize,
    },

    #[error("cross-domain graph has no positive weight")]
    AllZeroCrossGraph,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("perplexity {perplexity} is unreachable for point {point} of {block} (achievable range [{min:.6}, {max:.6}])")]
    PerplexityUnreachable {
        block: Block,
        point: usize,
        perplexity: f64,
        min: f64,
        max: f64,
    },

    #[error("conditional distribution of point {point} is degenerate")]
    DegenerateRow { point: usize },

    #[error("{block} needs at least {needed} points, got {got}")]
    TooFewPoints {
        block: Block,
        needed: usize,
        got: usize,
    },

    #[error("{block} has positive weight but no graph was supplied")]
    MissingGraphWithPositiveBeta { block: Block },

    #[error("q({i}, {j}) is zero while p({i}, {j}) is positive")]
    ZeroQWithPositiveP { i: usize, j: usize },

    #[error("objective became non-finite at iteration {iteration}")]
    DivergedObjective { iteration: usize },

    #[error("k = {k} exceeds the {available} available candidates")]
    KTooLarge { k: usize, available: usize },

    #[error("no query has a positive item")]
    NoPositives,

    #[error("no query has a negative item")]
    NoNegatives,

    #[error("{block} embedding is degenerate (zero spread)")]
    DegenerateDomain { block: Block },

    #[error("regularized covariance of {block} is numerically singular")]
    RankDeficient { block: Block },

    #[error("scatter plots need K = 2, got K = {0}")]
    UnsupportedDimension(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}:{line}: index ({row}, {col}) out of range for a {rows}x{cols} graph", path.display())]
    IndexOutOfRange {
        path: PathBuf,
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{}:{line}: duplicate entry ({row}, {col})", path.display())]
    DuplicateEntry {
        path: PathBuf,
        line: usize,
        row: usize,
        col: usize,
    },

    #[error("{}:{line}: weight must be positive", path.display())]
    NonPositiveWeight { path: PathBuf, line: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
