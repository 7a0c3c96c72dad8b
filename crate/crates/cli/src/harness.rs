//! End-to-end screening runs and their reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use mhscreen_core::minwise::{b_bit_match_probability, FULL_BITS};
use mhscreen_core::{
    exact_jaccard, filtering_rate, make_family, Decision, ExperimentReport, PairOutcome,
    ScreenConfig, Screener, SignatureStore, TokenSet,
};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::formats::{with_file, write_outcomes};

/// Parses `100,200,300`; an empty string is the empty schedule.
pub fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| HarnessError::Invalid(format!("bad checkpoint {t:?} in schedule")))
        })
        .collect()
}

/// Per-slot match probability that corresponds to Jaccard threshold `t`
/// for `bits`-wide slots. Identity for full-width signatures.
pub fn effective_threshold(t: f64, bits: u32) -> f64 {
    if bits >= FULL_BITS {
        t
    } else {
        b_bit_match_probability(t, bits)
    }
}

/// Signs exactly the sets referenced by `pairs`.
pub fn sign_referenced(
    sets: &BTreeMap<u64, TokenSet>,
    pairs: &[(u64, u64)],
    k: usize,
    master_seed: u64,
) -> Result<SignatureStore> {
    let mut ids: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let refs = ids
        .iter()
        .map(|id| sets.get(id).ok_or(HarnessError::MissingSet(*id)))
        .collect::<Result<Vec<&TokenSet>>>()?;
    let family = make_family(k, master_seed)?;
    let sigs = family.sign_all(&refs)?;
    Ok(ids.into_iter().zip(sigs).collect())
}

#[derive(Debug, Clone)]
pub struct ScreenRun {
    pub pairs: Vec<(u64, u64)>,
    pub outcomes: Vec<PairOutcome>,
    pub baseline: Option<Vec<PairOutcome>>,
    pub report: ExperimentReport,
    pub config: ScreenConfig,
    /// Slot width of the screened signatures.
    pub bits: u32,
}

/// Screens `pairs` given pre-computed signatures. `sets`, when available,
/// are used for agreement against the exact-Jaccard decision.
///
/// For b-bit signatures the thresholds are built on the per-slot match
/// probability `2^-b + (1 - 2^-b) T`, not on `T` itself.
pub fn run_screen_signed(
    store: &SignatureStore,
    sets: Option<&BTreeMap<u64, TokenSet>>,
    pairs: &[(u64, u64)],
    cfg: &ScreenConfig,
    with_baseline: bool,
) -> Result<ScreenRun> {
    let bits = store.values().next().map_or(FULL_BITS, |s| s.bits());
    let effective = ScreenConfig {
        threshold: effective_threshold(cfg.threshold, bits),
        ..cfg.clone()
    };
    let screener = Screener::new(effective.clone())?;

    let started = Instant::now();
    let result = screener.screen_batch(pairs, store)?;
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut report = result.report;
    report.wall_time_ms = Some(elapsed);

    let baseline = if with_baseline {
        let outcomes = Screener::baseline(&effective)?
            .screen_batch(pairs, store)?
            .outcomes;
        let decisions: Vec<Decision> = outcomes.iter().map(|o| o.decision).collect();
        report.accuracy = Some(ExperimentReport::agreement(&result.outcomes, &decisions));
        Some(outcomes)
    } else {
        None
    };

    if let Some(sets) = sets {
        let exact = pairs
            .iter()
            .map(|(a, b)| {
                let sa = sets.get(a).ok_or(HarnessError::MissingSet(*a))?;
                let sb = sets.get(b).ok_or(HarnessError::MissingSet(*b))?;
                Ok(if exact_jaccard(sa, sb)? >= cfg.threshold {
                    Decision::AboveThreshold
                } else {
                    Decision::BelowThreshold
                })
            })
            .collect::<Result<Vec<_>>>()?;
        report.agreement_vs_exact = Some(ExperimentReport::agreement(&result.outcomes, &exact));
    }

    Ok(ScreenRun {
        pairs: pairs.to_vec(),
        outcomes: result.outcomes,
        baseline,
        report,
        config: cfg.clone(),
        bits,
    })
}

/// Signs the referenced sets with `cfg.k` / `cfg.master_seed` and screens them.
pub fn run_screen(
    sets: &BTreeMap<u64, TokenSet>,
    pairs: &[(u64, u64)],
    cfg: &ScreenConfig,
    with_baseline: bool,
) -> Result<ScreenRun> {
    cfg.validate()?;
    let store = sign_referenced(sets, pairs, cfg.k, cfg.master_seed)?;
    run_screen_signed(&store, Some(sets), pairs, cfg, with_baseline)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a ScreenConfig,
    bits: u32,
    report: &'a ExperimentReport,
}

impl ScreenRun {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ReportFile {
            config: &self.config,
            bits: self.bits,
            report: &self.report,
        })?)
    }

    pub fn to_text(&self) -> String {
        let r = &self.report;
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "pairs                 {}", r.pairs);
        let _ = writeln!(s, "K                     {}", r.k);
        let _ = writeln!(s, "threshold T           {}", c.threshold);
        let _ = writeln!(s, "e (lower / upper)     {} / {}", c.e_lower, c.e_upper);
        if self.bits < FULL_BITS {
            let _ = writeln!(
                s,
                "slot width            {} bits (slot threshold {})",
                self.bits,
                effective_threshold(c.threshold, self.bits)
            );
        }
        let _ = writeln!(s, "above threshold       {}", r.above_threshold);
        let _ = writeln!(
            s,
            "comparisons           {} of {} ({:.1}%)",
            r.total_comparisons,
            r.baseline_comparisons,
            percent(r.total_comparisons, r.baseline_comparisons)
        );
        let _ = writeln!(s, "full comparisons      {}", r.full_comparisons);
        if let Some(a) = r.accuracy {
            let _ = writeln!(s, "accuracy vs full-K    {a:.6}");
        }
        if let Some(a) = r.agreement_vs_exact {
            let _ = writeln!(s, "agreement vs exact    {a:.6}");
        }
        if let Some(ms) = r.wall_time_ms {
            let _ = writeln!(s, "wall time             {ms:.1} ms");
        }
        if !r.checkpoints.is_empty() {
            let _ = writeln!(
                s,
                "\n{:>6} {:>9} {:>9} {:>10} {:>11}",
                "k", "filtered", "output", "FR", "FR_resolved"
            );
            for cp in &r.checkpoints {
                let _ = writeln!(
                    s,
                    "{:>6} {:>9} {:>9} {:>10.4} {:>11.4}",
                    cp.k, cp.filtered, cp.output, cp.fr_strict, cp.fr_resolved
                );
            }
        }
        s
    }

    /// Writes `outcomes.csv`, `report.txt` and `report.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        with_file(&dir.join("outcomes.csv"), |w| {
            write_outcomes(w, &self.pairs, &self.outcomes)
        })?;
        if let Some(baseline) = &self.baseline {
            with_file(&dir.join("baseline_outcomes.csv"), |w| {
                write_outcomes(w, &self.pairs, baseline)
            })?;
        }
        let text = self.to_text();
        with_file(&dir.join("report.txt"), |w| {
            w.write_all(text.as_bytes())
                .map_err(HarnessError::io("report.txt"))
        })?;
        let json = self.to_json()?;
        with_file(&dir.join("report.json"), |w| {
            w.write_all(json.as_bytes())
                .map_err(HarnessError::io("report.json"))
        })
    }
}

fn percent(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrRow {
    pub e: String,
    pub k: usize,
    pub fr_strict: f64,
    pub fr_resolved: f64,
}

/// Filtering-rate curves: one row per checkpoint for each labelled outcome set.
pub fn report_fr_curves(
    curves: &[(String, Vec<PairOutcome>)],
    schedule: &[usize],
) -> Result<Vec<FrRow>> {
    let mut rows = Vec::new();
    for (label, outcomes) in curves {
        if outcomes.is_empty() {
            return Err(HarnessError::Invalid(format!("no outcomes for {label}")));
        }
        for &k in schedule {
            let fr = filtering_rate(outcomes, schedule, k)?;
            rows.push(FrRow {
                e: label.clone(),
                k,
                fr_strict: fr.strict,
                fr_resolved: fr.resolved,
            });
        }
    }
    Ok(rows)
}

pub fn write_fr_csv<W: Write>(out: W, rows: &[FrRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(HarnessError::io("fr"))?;
    Ok(())
}
