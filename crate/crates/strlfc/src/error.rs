use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("column length {got} does not match tracker dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system is rank deficient: rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },
    #[error("erasure probability {0} is outside [0, 1)")]
    InvalidErasureProb(f64),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("decoding schedule must be non-empty, strictly increasing, with times >= 1")]
    InvalidSchedule,
    #[error("message length {got} does not match encoder message length {expected}")]
    MessageLengthMismatch { expected: usize, got: usize },
    #[error("expected stopping time diverges as the erasure probability approaches 1")]
    DivergentStopTime,
    #[error("message count {0} must be at least 2")]
    MessageCountTooSmall(u128),
    #[error("target error probability {0} is outside (0, 1)")]
    InvalidTargetError(f64),
    #[error("early-termination probability {0} is outside (0, 1)")]
    InvalidEpsilon(f64),
    #[error("binomial evaluation point {point} exceeds trial count {trials}")]
    BinomialOutOfRange { point: usize, trials: usize },
    #[error("schedule of {m} decoding times does not fit the {slots} candidate times")]
    ScheduleSpaceEmpty { m: usize, slots: usize },
    #[error("no schedule meets the error target with final time <= {cap}")]
    InfeasibleWithinCap { cap: u64 },
    #[error("at least {required} trials required, got {got}")]
    TooFewTrials { required: u64, got: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
