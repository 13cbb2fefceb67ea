use thiserror::Error;

use crate::ingest::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe must contain at least one item")]
    EmptyUniverse,
    #[error("universe has {size} items but {labels} labels were given")]
    LabelCount { size: usize, labels: usize },
    #[error("duplicate label {0:?} in universe")]
    DuplicateLabel(String),
    #[error("list is not a permutation of 0..{size}: {reason}")]
    NotAPermutation { size: usize, reason: String },
    #[error("censored list is invalid: {0}")]
    InvalidPrefix(String),
    #[error("at least 2 lists are required, got {0}")]
    TooFewLists(usize),
    #[error("at least 2 ranks are required to measure agreement, got {0}")]
    TooFewRanks(usize),
    #[error("rank {rank} outside 1..={size}")]
    RankOutOfRange { rank: u32, size: usize },
    #[error("list {list} has universe size {found}, expected {expected}")]
    UniverseMismatch { list: usize, expected: usize, found: usize },
    #[error("depth {depth} outside 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("{operation} requires complete lists; list {list} is censored")]
    CensoredInput { operation: &'static str, list: usize },
    #[error("number of permutations must be at least 1")]
    ZeroPermutations,
    #[error("quantile set is empty")]
    EmptyQuantiles,
    #[error("quantile level {0} is not in (0, 1)")]
    InvalidQuantile(f64),
    #[error("no curves supplied")]
    NoCurves,
    #[error("curve length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("curve must have at least one depth")]
    EmptyCurve,
    #[error("curve value at depth {depth} is {value}, expected a finite non-negative number")]
    InvalidCurveValue { depth: usize, value: String },
    #[error("band is not monotone in the quantile level at depth {depth}")]
    NonMonotoneBand { depth: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
