//! Plain-text set and pair files, and the outcome CSV.
//!
//! Sets file: one set per line, whitespace-separated decimal `u64` tokens.
//! The 0-based line number is the set id; lines starting with `#` are
//! comments (they still consume an id). Pairs file: `id_a id_b` per line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use mhscreen_core::{PairOutcome, Resolution, TokenSet};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Sets keyed by id, plus how many repeated tokens were dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedSets {
    pub sets: BTreeMap<u64, TokenSet>,
    pub duplicate_tokens: usize,
}

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim_start().starts_with('#')))
}

pub fn parse_sets<R: BufRead>(input: R) -> Result<LoadedSets> {
    let mut out = LoadedSets::default();
    for (idx, line) in data_lines(input) {
        let line = line.map_err(|e| HarnessError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let tokens = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>().map_err(|_| HarnessError::Parse {
                    line: idx + 1,
                    message: format!("invalid token {t:?}"),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        if tokens.is_empty() {
            return Err(HarnessError::Parse {
                line: idx + 1,
                message: "empty set".into(),
            });
        }
        let n = tokens.len();
        let set = TokenSet::new(tokens);
        out.duplicate_tokens += n - set.len();
        out.sets.insert(idx as u64, set);
    }
    Ok(out)
}

pub fn load_sets(path: &Path) -> Result<LoadedSets> {
    let file = File::open(path).map_err(HarnessError::io(path))?;
    parse_sets(BufReader::new(file))
}

/// Writes sets in order, one per line; the caller's ids must be `0..n`.
pub fn write_sets<W: Write>(mut out: W, sets: &[TokenSet]) -> std::io::Result<()> {
    for set in sets {
        let mut first = true;
        for t in set.iter() {
            if !first {
                out.write_all(b" ")?;
            }
            write!(out, "{t}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_pairs<R: BufRead>(input: R) -> Result<Vec<(u64, u64)>> {
    let mut pairs = Vec::new();
    for (idx, line) in data_lines(input) {
        let bad = |message: String| HarnessError::Parse {
            line: idx + 1,
            message,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ids: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("invalid set id {t:?}"))))
            .collect::<Result<_>>()?;
        match ids[..] {
            [a, b] => pairs.push((a, b)),
            _ => return Err(bad(format!("expected two set ids, found {}", ids.len()))),
        }
    }
    Ok(pairs)
}

pub fn load_pairs(path: &Path) -> Result<Vec<(u64, u64)>> {
    let file = File::open(path).map_err(HarnessError::io(path))?;
    parse_pairs(BufReader::new(file))
}

pub fn write_pairs<W: Write>(mut out: W, pairs: &[(u64, u64)]) -> std::io::Result<()> {
    for (a, b) in pairs {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

/// One row of the outcome CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub pair_index: usize,
    pub id_a: u64,
    pub id_b: u64,
    pub decision: String,
    pub resolution_kind: String,
    pub resolution_checkpoint: Option<usize>,
    pub comparisons_used: usize,
    pub estimate: f64,
}

impl OutcomeRecord {
    pub fn new(pair_index: usize, (id_a, id_b): (u64, u64), o: &PairOutcome) -> Self {
        Self {
            pair_index,
            id_a,
            id_b,
            decision: o.decision.to_string(),
            resolution_kind: o.resolution.kind().to_string(),
            resolution_checkpoint: o.resolution.checkpoint(),
            comparisons_used: o.comparisons_used,
            estimate: o.estimate,
        }
    }

    pub fn to_outcome(&self) -> Result<PairOutcome> {
        Ok(PairOutcome {
            decision: self.decision.parse()?,
            resolution: Resolution::from_parts(&self.resolution_kind, self.resolution_checkpoint)?,
            comparisons_used: self.comparisons_used,
            estimate: self.estimate,
        })
    }
}

pub fn write_outcomes<W: Write>(
    out: W,
    pairs: &[(u64, u64)],
    outcomes: &[PairOutcome],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, (pair, o)) in pairs.iter().zip(outcomes).enumerate() {
        w.serialize(OutcomeRecord::new(i, *pair, o))?;
    }
    w.flush().map_err(HarnessError::io("outcomes"))?;
    Ok(())
}

pub fn read_outcomes<R: Read>(input: R) -> Result<Vec<OutcomeRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|rec| rec.map_err(HarnessError::from))
        .collect()
}

pub fn load_outcomes(path: &Path) -> Result<Vec<OutcomeRecord>> {
    let file = File::open(path).map_err(HarnessError::io(path))?;
    read_outcomes(BufReader::new(file))
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn with_file<T>(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<T>) -> Result<T> {
    let file = File::create(path).map_err(HarnessError::io(path))?;
    let mut w = BufWriter::new(file);
    let v = f(&mut w)?;
    w.flush().map_err(HarnessError::io(path))?;
    Ok(v)
}
