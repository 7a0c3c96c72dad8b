//! Binomial tail probabilities and the per-checkpoint threshold solvers.
//!
//! Under the null hypothesis that a pair's similarity equals the screening
//! threshold `t`, the match count over the first `k` slots is
//! `Binomial(k, t)`. A count at or below `m_l` (lower tail mass `<= e`) or
//! above `m_u` (upper tail mass `<= e`) is a small-probability event, which
//! justifies stopping the comparison early.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Natural log of the binomial pmf `C(k, i) p^i (1 - p)^(k - i)`.
///
/// Returns `-inf` for zero-probability outcomes at `p = 0` or `p = 1`.
pub fn log_binom_pmf(i: usize, k: usize, p: f64) -> Result<f64> {
    check_count(i, k)?;
    check_probability(p)?;
    Ok(log_pmf_unchecked(i, k, p))
}

fn log_pmf_unchecked(i: usize, k: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if i == k { 0.0 } else { f64::NEG_INFINITY };
    }
    let (i_f, k_f) = (i as f64, k as f64);
    let log_coeff =
        libm::lgamma(k_f + 1.0) - libm::lgamma(i_f + 1.0) - libm::lgamma(k_f - i_f + 1.0);
    log_coeff + i_f * p.ln() + (k_f - i_f) * (-p).ln_1p()
}

/// `sum over i in range of pmf(i; k, p)`, accumulated relative to the
/// largest term so tiny tails keep full relative precision.
fn sum_pmf(range: std::ops::RangeInclusive<usize>, k: usize, p: f64) -> f64 {
    if range.is_empty() {
        return 0.0;
    }
    let logs: Vec<f64> = range.map(|i| log_pmf_unchecked(i, k, p)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let scaled: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    (max + scaled.ln()).exp()
}

/// `(P(X <= m), P(X > m))` for `X ~ Binomial(k, p)`.
///
/// The tail on the far side of the mean is summed directly; the other is its
/// complement. Both sums have only positive terms.
fn tails(m: usize, k: usize, p: f64) -> (f64, f64) {
    if m >= k {
        return (1.0, 0.0);
    }
    if (m as f64) < k as f64 * p {
        let lower = sum_pmf(0..=m, k, p).min(1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = sum_pmf(m + 1..=k, k, p).min(1.0);
        (1.0 - upper, upper)
    }
}

/// `P(X <= m)` for `X ~ Binomial(k, p)`.
pub fn binom_cdf(m: usize, k: usize, p: f64) -> Result<f64> {
    TailQuery::new(m, k, p).map(|q| q.cdf())
}

/// `P(X > m) = sum_{i=m+1}^{k} pmf(i; k, p)`.
pub fn binom_upper_tail(m: usize, k: usize, p: f64) -> Result<f64> {
    TailQuery::new(m, k, p).map(|q| q.upper_tail())
}

/// A validated `(m, k, p)` tail question.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    m: usize,
    k: usize,
    p: f64,
}

impl TailQuery {
    pub fn new(m: usize, k: usize, p: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("binomial needs k >= 1 trials".into()));
        }
        check_count(m, k)?;
        check_probability(p)?;
        Ok(Self { m, k, p })
    }

    pub fn cdf(&self) -> f64 {
        tails(self.m, self.k, self.p).0
    }

    pub fn upper_tail(&self) -> f64 {
        tails(self.m, self.k, self.p).1
    }
}

fn check_count(i: usize, k: usize) -> Result<()> {
    if i > k {
        return Err(Error::OutOfRange(format!("count {i} exceeds trials {k}")));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p} not in [0, 1]")));
    }
    Ok(())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::OutOfRange(format!("{name} = {v} not in (0, 1)")));
    }
    Ok(())
}

/// Largest `m` with `P(X <= m) <= e` under `Binomial(k, t)`, or `None` when
/// even `m = 0` has more than `e` mass (no lower filtering at this `k`).
pub fn solve_lower(k: usize, t: f64, e: f64) -> Result<Option<usize>> {
    check_solver_args(k, t, e)?;
    // cdf is nondecreasing in m, so the predicate holds on a prefix of 0..=k.
    let qualifying = partition_point(k + 1, |m| tails(m, k, t).0 <= e);
    Ok(qualifying.checked_sub(1))
}

/// Smallest `m` with `P(X > m) <= e` under `Binomial(k, t)`.
///
/// `m = k` always qualifies with an empty tail, but no count can exceed
/// it, so that case is reported as `None` (no upper filtering at this `k`).
pub fn solve_upper(k: usize, t: f64, e: f64) -> Result<Option<usize>> {
    check_solver_args(k, t, e)?;
    // upper tail is nonincreasing in m: the failing m form a prefix.
    let m = partition_point(k + 1, |m| tails(m, k, t).1 > e);
    Ok((m < k).then_some(m))
}

fn check_solver_args(k: usize, t: f64, e: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::OutOfRange("checkpoint k must be >= 1".into()));
    }
    check_open_unit("threshold", t)?;
    check_open_unit("small probability", e)
}

/// First index in `0..n` where `pred` turns false, for a predicate true on a prefix.
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Thresholds at one comparison point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointThresholds {
    pub k: usize,
    pub m_lower: Option<usize>,
    pub m_upper: Option<usize>,
}

impl CheckpointThresholds {
    /// `T_L(k) = m_l / k`.
    pub fn lower_threshold(&self) -> Option<f64> {
        self.m_lower.map(|m| m as f64 / self.k as f64)
    }

    /// `T_U(k) = m_u / k`.
    pub fn upper_threshold(&self) -> Option<f64> {
        self.m_upper.map(|m| m as f64 / self.k as f64)
    }

    pub fn is_active(&self) -> bool {
        self.m_lower.is_some() || self.m_upper.is_some()
    }
}

/// Lower and upper thresholds for every checkpoint of a schedule, computed
/// once for a given `(t, e_lower, e_upper)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    t: f64,
    e_lower: f64,
    e_upper: f64,
    rows: Vec<CheckpointThresholds>,
}

impl ThresholdTable {
    /// Builds the table with separate significance levels for the two tails.
    pub fn build(t: f64, e_lower: f64, e_upper: f64, checkpoints: &[usize]) -> Result<Self> {
        check_open_unit("threshold", t)?;
        check_open_unit("small probability", e_lower)?;
        check_open_unit("small probability", e_upper)?;
        validate_schedule(checkpoints)?;
        let rows = checkpoints
            .iter()
            .map(|&k| {
                Ok(CheckpointThresholds {
                    k,
                    m_lower: solve_lower(k, t, e_lower)?,
                    m_upper: solve_upper(k, t, e_upper)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            e_lower,
            e_upper,
            rows,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.t
    }

    pub fn e_lower(&self) -> f64 {
        self.e_lower
    }

    pub fn e_upper(&self) -> f64 {
        self.e_upper
    }

    pub fn rows(&self) -> &[CheckpointThresholds] {
        &self.rows
    }

    pub fn checkpoints(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.k)
    }

    pub fn last_checkpoint(&self) -> Option<usize> {
        self.rows.last().map(|r| r.k)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Audit CSV with header `k,m_l,T_L,m_u,T_U`; absent thresholds are empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,m_l,T_L,m_u,T_U")?;
        for row in &self.rows {
            let cell = |v: Option<usize>| v.map(|m| m.to_string()).unwrap_or_default();
            let ratio = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                row.k,
                cell(row.m_lower),
                ratio(row.lower_threshold()),
                cell(row.m_upper),
                ratio(row.upper_threshold())
            )?;
        }
        Ok(())
    }
}

/// Single shared `e` for both tails.
pub fn build_threshold_table(t: f64, e: f64, checkpoints: &[usize]) -> Result<ThresholdTable> {
    ThresholdTable::build(t, e, e, checkpoints)
}

pub(crate) fn validate_schedule(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.first() == Some(&0) {
        return Err(Error::InvalidSchedule("checkpoints must be >= 1".into()));
    }
    if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule(format!(
            "checkpoints must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}
