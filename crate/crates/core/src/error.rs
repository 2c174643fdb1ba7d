use thiserror::Error;

/// Errors raised by the sand pile toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KspmError {
    #[error("grain-fall parameter must be at least 2, got {0}")]
    InvalidParameter(usize),

    #[error("column {column} holds {value} < {d}, the rule cannot fire there")]
    FireOnStableColumn { column: usize, value: i64, d: usize },

    #[error("negative height difference {value} at column {column}")]
    NegativeEntry { column: usize, value: i64 },

    #[error("configuration is not a fixed point (column {0} is fireable)")]
    NotAFixedPoint(usize),

    #[error("avalanche does not fire every column of [{l}, {hi}]")]
    PreconditionUnverifiable { l: usize, hi: usize },

    #[error("peak list is empty")]
    EmptyPeakList,

    #[error("interval I_{i} starts at column {start}, left of the validity bound {bound}")]
    IntervalTooFarLeft { i: usize, start: usize, bound: usize },

    #[error("state {0} is not reachable in the transducer")]
    UnknownState(String),

    #[error("letter {letter} is outside the alphabet 0..={max}")]
    InvalidLetter { letter: u8, max: u8 },

    #[error("cannot parse word: {0}")]
    ParseWord(String),

    #[error("iteration budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("invalid regular trace: {0}")]
    InvalidSpec(String),

    #[error("x-sequence step {index} is not an even division ({numerator}/2)")]
    NonIntegralStep { index: usize, numerator: i64 },
}

pub type Result<T> = std::result::Result<T, KspmError>;
