//! File formats and experiment harness behind the `mhscreen` binary.

pub mod error;
pub mod formats;
pub mod harness;

pub use error::{HarnessError, Result};
pub use formats::{
    load_outcomes, load_pairs, load_sets, parse_pairs, parse_sets, LoadedSets, OutcomeRecord,
};
pub use harness::{
    parse_schedule, report_fr_curves, run_screen, run_screen_signed, FrRow, ScreenRun,
};
