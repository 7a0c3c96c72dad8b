//! MinHash signatures for integer token sets, and a screener that decides
//! whether each pair's similarity is above a threshold, stopping the slot
//! comparison early once a binomial tail test makes the outcome clear.
//!
//! ```
//! use mhscreen_core::{make_family, ScreenConfig, Screener, TokenSet};
//!
//! let family = make_family(1000, 42).unwrap();
//! let a = family.sign(&TokenSet::new(0..100)).unwrap();
//! let b = family.sign(&TokenSet::new(0..100)).unwrap();
//! let screener = Screener::new(ScreenConfig::default()).unwrap();
//! let outcome = screener.compare(&a, &b).unwrap();
//! assert_eq!(outcome.comparisons_used, 100);
//! ```

pub mod binomial;
pub mod error;
pub mod filter;
pub mod minwise;
pub mod sets;
pub mod workload;

pub use binomial::{
    binom_cdf, binom_upper_tail, build_threshold_table, log_binom_pmf, solve_lower, solve_upper,
    CheckpointThresholds, TailQuery, ThresholdTable,
};
pub use error::{Error, Result};
pub use filter::{
    compare_pair, default_schedule, filtering_rate, screen_batch, BatchResult, CheckpointStats,
    Decision, ExperimentReport, FilteringRate, PairOutcome, Resolution, ScreenConfig, Screener,
    SignatureStore,
};
pub use minwise::{
    estimate, estimator_variance, make_family, match_count, sign, to_b_bit, FamilyId, HashFamily,
    MatchCount, Signature, DEFAULT_K,
};
pub use sets::{exact_jaccard, exhaustive_collision_probability, jaccard_ratio, TokenSet};
pub use workload::{gen_synthetic, GroupSpec, SyntheticWorkload, WorkloadSpec};
