use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined Jaccard: both sets are empty")]
    UndefinedJaccard,

    #[error("minhash undefined on empty set")]
    EmptySet,

    #[error("oracle scale exceeded: universe size {0} > {max}", max = crate::sets::MAX_ORACLE_UNIVERSE)]
    OracleScaleExceeded(usize),

    #[error("token {token} lies outside the universe [0, {universe})")]
    TokenOutsideUniverse { token: u64, universe: usize },

    #[error("hash family needs at least one permutation")]
    NoPermutations,

    #[error("signature families differ")]
    FamilyMismatch,

    #[error("prefix of {upto} slots exceeds signature length {k}")]
    PrefixTooLong { upto: usize, k: usize },

    #[error("estimate needs at least one examined slot")]
    NoSlotsExamined,

    #[error("b-bit width must be in 1..=32 or 64, got {0}")]
    InvalidBits(u32),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid checkpoint schedule: {0}")]
    InvalidSchedule(String),

    #[error("no signature for set id {0}")]
    MissingSignature(u64),

    #[error("invalid workload: {0}")]
    InvalidWorkload(String),

    #[error("signature cache: {0}")]
    Cache(String),
}
