//! Synthetic pair workloads with exactly known Jaccard similarity.
//!
//! For a target `J = a / b` (reduced) and a scale `c`, a pair shares `a*c`
//! tokens out of a union of `b*c`; the remaining `(b - a)*c` tokens are split
//! between the two sides as evenly as possible. Tokens come from one
//! counter, so no token is shared across pairs.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::TokenSet;

/// One group: `pairs` pairs at exact Jaccard `jaccard`, union size in `union_min..=union_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub jaccard: Ratio<u64>,
    pub pairs: usize,
    pub union_min: u64,
    pub union_max: u64,
}

impl GroupSpec {
    pub fn new(jaccard: Ratio<u64>, pairs: usize, union_min: u64, union_max: u64) -> Result<Self> {
        let g = Self {
            jaccard,
            pairs,
            union_min,
            union_max,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let j = self.jaccard;
        if *j.numer() == 0 || j.numer() >= j.denom() {
            return Err(Error::InvalidWorkload(format!(
                "target Jaccard {j} must lie in the open interval (0, 1)"
            )));
        }
        if self.union_min > self.union_max {
            return Err(Error::InvalidWorkload(format!(
                "empty union size range {}-{}",
                self.union_min, self.union_max
            )));
        }
        if self.scales().is_empty() {
            return Err(Error::InvalidWorkload(format!(
                "Jaccard {j} needs a union size divisible by {}, none in {}-{}",
                j.denom(),
                self.union_min,
                self.union_max
            )));
        }
        Ok(())
    }

    /// Smallest and largest scale `c` with `denom * c` in the union range.
    fn scales(&self) -> std::ops::RangeInclusive<u64> {
        let d = *self.jaccard.denom();
        self.union_min.div_ceil(d).max(1)..=self.union_max / d
    }
}

/// Parses `J:count:size` where `J` is a decimal (`0.8`) or fraction (`4/5`)
/// and `size` is a union size `500` or range `400-600`.
impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidWorkload(format!("group {s:?}: {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [j, count, size] = parts[..] else {
            return Err(bad("expected J:count:size"));
        };
        let jaccard = parse_ratio(j).ok_or_else(|| bad("bad Jaccard"))?;
        let pairs = count.trim().parse().map_err(|_| bad("bad pair count"))?;
        let (lo, hi) = match size.split_once('-') {
            Some((lo, hi)) => (lo.trim().parse(), hi.trim().parse()),
            None => (size.trim().parse(), size.trim().parse()),
        };
        let (lo, hi) = (
            lo.map_err(|_| bad("bad size"))?,
            hi.map_err(|_| bad("bad size"))?,
        );
        GroupSpec::new(jaccard, pairs, lo, hi)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}",
            self.jaccard, self.pairs, self.union_min, self.union_max
        )
    }
}

/// Exact rational from `a/b` or a plain decimal such as `0.35`.
pub fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (u64, u64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (d != 0).then(|| Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let denom = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().ok()?
    };
    Some(Ratio::new(
        int.checked_mul(denom)?.checked_add(frac)?,
        denom,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub groups: Vec<GroupSpec>,
    pub seed: u64,
}

/// Generated sets; pair `i` is `(2i, 2i + 1)` with target `targets[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWorkload {
    pub sets: Vec<TokenSet>,
    pub pairs: Vec<(u64, u64)>,
    pub targets: Vec<Ratio<u64>>,
}

impl SyntheticWorkload {
    pub fn pair_sets(&self, i: usize) -> (&TokenSet, &TokenSet) {
        let (a, b) = self.pairs[i];
        (&self.sets[a as usize], &self.sets[b as usize])
    }
}

pub fn gen_synthetic(spec: &WorkloadSpec) -> Result<SyntheticWorkload> {
    for g in &spec.groups {
        g.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // leave headroom so the counter cannot wrap
    let mut next: u64 = rng.gen::<u32>() as u64;
    let total: usize = spec.groups.iter().map(|g| g.pairs).sum();
    let mut out = SyntheticWorkload {
        sets: Vec::with_capacity(2 * total),
        pairs: Vec::with_capacity(total),
        targets: Vec::with_capacity(total),
    };
    for g in &spec.groups {
        let (a, b) = (*g.jaccard.numer(), *g.jaccard.denom());
        for _ in 0..g.pairs {
            let c = rng.gen_range(g.scales());
            let shared = a * c;
            let rest = (b - a) * c;
            let only_a = rest / 2;
            let only_b = rest - only_a;

            let start = next;
            next += shared + rest;
            let shared_range = start..start + shared;
            let a_range = shared_range.end..shared_range.end + only_a;
            let b_range = a_range.end..a_range.end + only_b;

            let id = out.sets.len() as u64;
            out.sets
                .push(TokenSet::new(shared_range.clone().chain(a_range)));
            out.sets.push(TokenSet::new(shared_range.chain(b_range)));
            out.pairs.push((id, id + 1));
            out.targets.push(g.jaccard);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::jaccard_ratio;

    #[test]
    fn parses_ratios() {
        assert_eq!(parse_ratio("0.8"), Some(Ratio::new(4, 5)));
        assert_eq!(parse_ratio("0.35"), Some(Ratio::new(7, 20)));
        assert_eq!(parse_ratio("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_ratio(".5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_ratio("abc"), None);
        assert_eq!(parse_ratio("1/0"), None);
    }

    #[test]
    fn parses_groups() {
        let g: GroupSpec = "0.5:10:400-600".parse().unwrap();
        assert_eq!(g.jaccard, Ratio::new(1, 2));
        assert_eq!((g.pairs, g.union_min, g.union_max), (10, 400, 600));
        let g: GroupSpec = "1/3:2:30".parse().unwrap();
        assert_eq!((g.union_min, g.union_max), (30, 30));
        assert!("1.0:5:100".parse::<GroupSpec>().is_err());
        assert!("0:5:100".parse::<GroupSpec>().is_err());
        assert!("0.5:5".parse::<GroupSpec>().is_err());
        // 1/3 needs a multiple of 3
        assert!("1/3:5:31-32".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn smallest_half_pair() {
        let spec = WorkloadSpec {
            groups: vec!["0.5:1:4".parse().unwrap()],
            seed: 1,
        };
        let w = gen_synthetic(&spec).unwrap();
        let (a, b) = w.pair_sets(0);
        assert_eq!((a.len(), b.len()), (3, 3));
        assert_eq!(jaccard_ratio(a, b).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn every_pair_hits_its_target_exactly() {
        let spec = WorkloadSpec {
            groups: vec![
                "0.8:4000:450-550".parse().unwrap(),
                "0.3:50:10-200".parse().unwrap(),
                "2/7:50:7-70".parse().unwrap(),
            ],
            seed: 42,
        };
        let w = gen_synthetic(&spec).unwrap();
        assert_eq!(w.pairs.len(), 4100);
        for i in 0..w.pairs.len() {
            let (a, b) = w.pair_sets(i);
            assert_eq!(jaccard_ratio(a, b).unwrap(), w.targets[i]);
            let union = a.len() + b.len() - a.intersection_len(b);
            assert!(union as u64 >= 7);
        }
        // tokens are disjoint across pairs
        let mut all: Vec<u64> = Vec::new();
        for i in 0..w.pairs.len() {
            let (a, b) = w.pair_sets(i);
            let mut u: Vec<u64> = a.iter().chain(b.iter()).collect();
            u.sort_unstable();
            u.dedup();
            all.extend(u);
        }
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = WorkloadSpec {
            groups: vec!["0.6:20:50-100".parse().unwrap()],
            seed: 7,
        };
        assert_eq!(gen_synthetic(&spec).unwrap(), gen_synthetic(&spec).unwrap());
        let other = WorkloadSpec {
            seed: 8,
            ..spec.clone()
        };
        assert_ne!(
            gen_synthetic(&spec).unwrap(),
            gen_synthetic(&other).unwrap()
        );
    }
}
