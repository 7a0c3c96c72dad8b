//! Early-terminating pair comparison.
//!
//! Slots are compared in order while a running match count is kept. At each
//! checkpoint `k_i` of the schedule the count is tested against the
//! precomputed thresholds:
//!
//! * `X > m_u(k_i)`, i.e. `R(k_i) > T_U(k_i)`: output early as above threshold;
//! * `X <= m_l(k_i)`, i.e. `R(k_i) <= T_L(k_i)`: filter early as below threshold;
//! * otherwise continue to the next checkpoint.
//!
//! A pair no checkpoint resolves is compared over all `K` slots and decided
//! by `X / K >= T`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{validate_schedule, ThresholdTable};
use crate::error::{Error, Result};
use crate::minwise::Signature;

/// Signatures keyed by set id.
pub type SignatureStore = HashMap<u64, Signature>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    AboveThreshold,
    BelowThreshold,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::AboveThreshold => "above",
            Decision::BelowThreshold => "below",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "above" => Ok(Decision::AboveThreshold),
            "below" => Ok(Decision::BelowThreshold),
            other => Err(Error::OutOfRange(format!("unknown decision {other:?}"))),
        }
    }
}

/// How a pair was resolved. Early variants carry the checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    OutputEarly(usize),
    FilteredEarly(usize),
    FullComparison,
}

impl Resolution {
    pub fn kind(&self) -> &'static str {
        match self {
            Resolution::OutputEarly(_) => "output_early",
            Resolution::FilteredEarly(_) => "filtered_early",
            Resolution::FullComparison => "full",
        }
    }

    pub fn checkpoint(&self) -> Option<usize> {
        match *self {
            Resolution::OutputEarly(k) | Resolution::FilteredEarly(k) => Some(k),
            Resolution::FullComparison => None,
        }
    }

    pub fn is_early(&self) -> bool {
        !matches!(self, Resolution::FullComparison)
    }

    /// Inverse of `kind()` / `checkpoint()`.
    pub fn from_parts(kind: &str, checkpoint: Option<usize>) -> Result<Self> {
        match (kind, checkpoint) {
            ("output_early", Some(k)) => Ok(Resolution::OutputEarly(k)),
            ("filtered_early", Some(k)) => Ok(Resolution::FilteredEarly(k)),
            ("full", _) => Ok(Resolution::FullComparison),
            (kind, _) => Err(Error::OutOfRange(format!(
                "bad resolution {kind:?} / checkpoint {checkpoint:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub decision: Decision,
    pub resolution: Resolution,
    pub comparisons_used: usize,
    /// `X / k` at the point the decision was made.
    pub estimate: f64,
}

/// Parameters of one screening run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub threshold: f64,
    pub e_lower: f64,
    pub e_upper: f64,
    pub schedule: Vec<usize>,
    pub k: usize,
    pub master_seed: u64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            e_lower: 1e-5,
            e_upper: 1e-5,
            schedule: default_schedule(),
            k: crate::minwise::DEFAULT_K,
            master_seed: 42,
        }
    }
}

/// `100, 200, ..., 900`.
pub fn default_schedule() -> Vec<usize> {
    (1..=9).map(|i| i * 100).collect()
}

impl ScreenConfig {
    pub fn new(threshold: f64, e: f64, schedule: Vec<usize>, k: usize, master_seed: u64) -> Self {
        Self {
            threshold,
            e_lower: e,
            e_upper: e,
            schedule,
            k,
            master_seed,
        }
    }

    pub fn with_e_upper(mut self, e_upper: f64) -> Self {
        self.e_upper = e_upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::NoPermutations);
        }
        validate_schedule(&self.schedule)?;
        if let Some(&last) = self.schedule.last() {
            if last > self.k {
                return Err(Error::InvalidSchedule(format!(
                    "checkpoint {last} exceeds K = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }

    pub fn threshold_table(&self) -> Result<ThresholdTable> {
        self.validate()?;
        ThresholdTable::build(self.threshold, self.e_lower, self.e_upper, &self.schedule)
    }
}

/// Runs the early-terminating comparison on one pair.
pub fn compare_pair(
    a: &Signature,
    b: &Signature,
    table: &ThresholdTable,
    cfg: &ScreenConfig,
) -> Result<PairOutcome> {
    if !a.is_comparable(b) {
        return Err(Error::FamilyMismatch);
    }
    if a.k() != cfg.k {
        return Err(Error::OutOfRange(format!(
            "signature length {} does not match K = {}",
            a.k(),
            cfg.k
        )));
    }
    if let Some(last) = table.last_checkpoint() {
        if last > cfg.k {
            return Err(Error::InvalidSchedule(format!(
                "table checkpoint {last} exceeds K = {}",
                cfg.k
            )));
        }
    }
    Ok(compare_unchecked(
        a.values(),
        b.values(),
        table,
        cfg.threshold,
    ))
}

fn count_matches(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

fn compare_unchecked(a: &[u64], b: &[u64], table: &ThresholdTable, threshold: f64) -> PairOutcome {
    let mut x = 0;
    let mut done = 0;
    for row in table.rows().iter().filter(|r| r.is_active()) {
        x += count_matches(&a[done..row.k], &b[done..row.k]);
        done = row.k;
        let estimate = x as f64 / row.k as f64;
        if row.m_upper.is_some_and(|m| x > m) {
            return PairOutcome {
                decision: Decision::AboveThreshold,
                resolution: Resolution::OutputEarly(row.k),
                comparisons_used: row.k,
                estimate,
            };
        }
        if row.m_lower.is_some_and(|m| x <= m) {
            return PairOutcome {
                decision: Decision::BelowThreshold,
                resolution: Resolution::FilteredEarly(row.k),
                comparisons_used: row.k,
                estimate,
            };
        }
    }
    x += count_matches(&a[done..], &b[done..]);
    let k = a.len();
    let estimate = x as f64 / k as f64;
    PairOutcome {
        decision: if estimate >= threshold {
            Decision::AboveThreshold
        } else {
            Decision::BelowThreshold
        },
        resolution: Resolution::FullComparison,
        comparisons_used: k,
        estimate,
    }
}

/// Cumulative filtering rates at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilteringRate {
    /// Pairs filtered early at or before `k`, over all pairs.
    pub strict: f64,
    /// Pairs filtered or output early at or before `k`, over all pairs.
    pub resolved: f64,
}

/// Filtering rates at checkpoint `k` of `schedule`.
pub fn filtering_rate(
    outcomes: &[PairOutcome],
    schedule: &[usize],
    k: usize,
) -> Result<FilteringRate> {
    if !schedule.contains(&k) {
        return Err(Error::InvalidSchedule(format!("{k} is not a checkpoint")));
    }
    let n = outcomes.len();
    if n == 0 {
        return Ok(FilteringRate {
            strict: 0.0,
            resolved: 0.0,
        });
    }
    let (mut filtered, mut resolved) = (0usize, 0usize);
    for o in outcomes {
        match o.resolution {
            Resolution::FilteredEarly(at) if at <= k => {
                filtered += 1;
                resolved += 1;
            }
            Resolution::OutputEarly(at) if at <= k => resolved += 1,
            _ => {}
        }
    }
    Ok(FilteringRate {
        strict: filtered as f64 / n as f64,
        resolved: resolved as f64 / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub k: usize,
    /// Pairs filtered early exactly at this checkpoint.
    pub filtered: usize,
    /// Pairs output early exactly at this checkpoint.
    pub output: usize,
    pub fr_strict: f64,
    pub fr_resolved: f64,
}

/// Aggregate metrics of a screening run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub pairs: usize,
    pub k: usize,
    pub total_comparisons: u64,
    /// `pairs * K`, the cost without early termination.
    pub baseline_comparisons: u64,
    pub above_threshold: usize,
    pub full_comparisons: usize,
    pub checkpoints: Vec<CheckpointStats>,
    /// Fraction of decisions equal to the full-K decision, when a baseline was run.
    pub accuracy: Option<f64>,
    /// Fraction of decisions equal to the exact-Jaccard decision, when sets are known.
    pub agreement_vs_exact: Option<f64>,
    /// Informational only.
    pub wall_time_ms: Option<f64>,
}

impl ExperimentReport {
    pub fn from_outcomes(outcomes: &[PairOutcome], schedule: &[usize], k: usize) -> Self {
        let total_comparisons = outcomes.iter().map(|o| o.comparisons_used as u64).sum();
        let checkpoints = schedule
            .iter()
            .map(|&ck| {
                let at = |r: Resolution| r.checkpoint() == Some(ck);
                let filtered = outcomes
                    .iter()
                    .filter(|o| {
                        matches!(o.resolution, Resolution::FilteredEarly(_)) && at(o.resolution)
                    })
                    .count();
                let output = outcomes
                    .iter()
                    .filter(|o| {
                        matches!(o.resolution, Resolution::OutputEarly(_)) && at(o.resolution)
                    })
                    .count();
                let fr = filtering_rate(outcomes, schedule, ck).expect("checkpoint from schedule");
                CheckpointStats {
                    k: ck,
                    filtered,
                    output,
                    fr_strict: fr.strict,
                    fr_resolved: fr.resolved,
                }
            })
            .collect();
        Self {
            pairs: outcomes.len(),
            k,
            total_comparisons,
            baseline_comparisons: outcomes.len() as u64 * k as u64,
            above_threshold: outcomes
                .iter()
                .filter(|o| o.decision == Decision::AboveThreshold)
                .count(),
            full_comparisons: outcomes
                .iter()
                .filter(|o| o.resolution == Resolution::FullComparison)
                .count(),
            checkpoints,
            accuracy: None,
            agreement_vs_exact: None,
            wall_time_ms: None,
        }
    }

    /// Fraction of pairs whose decision matches `reference` (same order).
    pub fn agreement(outcomes: &[PairOutcome], reference: &[Decision]) -> f64 {
        assert_eq!(
            outcomes.len(),
            reference.len(),
            "outcome/reference length mismatch"
        );
        if outcomes.is_empty() {
            return 1.0;
        }
        let same = outcomes
            .iter()
            .zip(reference)
            .filter(|(o, d)| o.decision == **d)
            .count();
        same as f64 / outcomes.len() as f64
    }
}

/// Outcomes of a batch in input order, plus the aggregate report.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub outcomes: Vec<PairOutcome>,
    /// Indices of pairs decided above threshold.
    pub output_pairs: Vec<usize>,
    pub report: ExperimentReport,
}

/// A config with its threshold table built once.
#[derive(Debug, Clone)]
pub struct Screener {
    cfg: ScreenConfig,
    table: ThresholdTable,
}

impl Screener {
    pub fn new(cfg: ScreenConfig) -> Result<Self> {
        let table = cfg.threshold_table()?;
        Ok(Self { cfg, table })
    }

    /// Same config with an empty schedule: every pair runs all K slots.
    pub fn baseline(cfg: &ScreenConfig) -> Result<Self> {
        Self::new(ScreenConfig {
            schedule: Vec::new(),
            ..cfg.clone()
        })
    }

    pub fn config(&self) -> &ScreenConfig {
        &self.cfg
    }

    pub fn table(&self) -> &ThresholdTable {
        &self.table
    }

    pub fn compare(&self, a: &Signature, b: &Signature) -> Result<PairOutcome> {
        compare_pair(a, b, &self.table, &self.cfg)
    }

    /// Compares every pair, in parallel. Output order follows `pairs`.
    pub fn screen_batch(
        &self,
        pairs: &[(u64, u64)],
        store: &SignatureStore,
    ) -> Result<BatchResult> {
        let resolved: Vec<(&Signature, &Signature)> = pairs
            .iter()
            .map(|(a, b)| {
                let sa = store.get(a).ok_or(Error::MissingSignature(*a))?;
                let sb = store.get(b).ok_or(Error::MissingSignature(*b))?;
                Ok((sa, sb))
            })
            .collect::<Result<_>>()?;
        let outcomes: Vec<PairOutcome> = resolved
            .par_iter()
            .map(|(a, b)| self.compare(a, b))
            .collect::<Result<_>>()?;
        let output_pairs = outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.decision == Decision::AboveThreshold)
            .map(|(i, _)| i)
            .collect();
        let report = ExperimentReport::from_outcomes(&outcomes, &self.cfg.schedule, self.cfg.k);
        Ok(BatchResult {
            outcomes,
            output_pairs,
            report,
        })
    }
}

/// Shorthand for building a [`Screener`] and running one batch.
pub fn screen_batch(
    pairs: &[(u64, u64)],
    store: &SignatureStore,
    cfg: &ScreenConfig,
) -> Result<BatchResult> {
    Screener::new(cfg.clone())?.screen_batch(pairs, store)
}
