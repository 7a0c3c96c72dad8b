//! Token sets and exact Jaccard similarity.
//!
//! A [`TokenSet`] is the bag-of-words style representation of one item: a
//! sorted, duplicate-free list of `u64` token identifiers. Presence only,
//! no multiplicities.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Largest universe the exhaustive permutation oracle will enumerate (8! = 40320).
pub const MAX_ORACLE_UNIVERSE: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSet {
    // sorted, deduplicated
    tokens: Vec<u64>,
}

impl TokenSet {
    pub fn new<I: IntoIterator<Item = u64>>(tokens: I) -> Self {
        let mut tokens: Vec<u64> = tokens.into_iter().collect();
        tokens.sort_unstable();
        tokens.dedup();
        Self { tokens }
    }

    /// Builds a set from tokens already sorted and duplicate-free.
    ///
    /// Returns `None` if the input violates the ordering.
    pub fn from_sorted(tokens: Vec<u64>) -> Option<Self> {
        if tokens.windows(2).all(|w| w[0] < w[1]) {
            Some(Self { tokens })
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: u64) -> bool {
        self.tokens.binary_search(&token).is_ok()
    }

    pub fn tokens(&self) -> &[u64] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.tokens.iter().copied()
    }

    /// Size of the intersection with `other`, by a merge walk over both sorted lists.
    pub fn intersection_len(&self, other: &TokenSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        let (a, b) = (&self.tokens, &other.tokens);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl FromIterator<u64> for TokenSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl From<BTreeSet<u64>> for TokenSet {
    fn from(set: BTreeSet<u64>) -> Self {
        Self {
            tokens: set.into_iter().collect(),
        }
    }
}

impl fmt::Debug for TokenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.tokens.iter()).finish()
    }
}

/// Exact Jaccard similarity as the reduced fraction `|a ∩ b| / |a ∪ b|`.
pub fn jaccard_ratio(a: &TokenSet, b: &TokenSet) -> Result<Ratio<u64>> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::UndefinedJaccard);
    }
    let inter = a.intersection_len(b) as u64;
    let union = (a.len() + b.len()) as u64 - inter;
    Ok(Ratio::new(inter, union))
}

/// Exact Jaccard similarity `|a ∩ b| / |a ∪ b|`.
///
/// Both counts are computed with integer arithmetic; only the final
/// division is floating point. Two empty sets are an error.
pub fn exact_jaccard(a: &TokenSet, b: &TokenSet) -> Result<f64> {
    let r = jaccard_ratio(a, b)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Probability that `a` and `b` share their minimum under a uniformly random
/// permutation of `{0, .., universe_size - 1}`, by enumerating every permutation.
///
/// This is an independent check on the min-wise collision identity and is
/// only feasible for tiny universes.
pub fn exhaustive_collision_probability(
    a: &TokenSet,
    b: &TokenSet,
    universe_size: usize,
) -> Result<Ratio<u64>> {
    if universe_size > MAX_ORACLE_UNIVERSE {
        return Err(Error::OracleScaleExceeded(universe_size));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(token) = a
        .iter()
        .chain(b.iter())
        .find(|&t| t >= universe_size as u64)
    {
        return Err(Error::TokenOutsideUniverse {
            token,
            universe: universe_size,
        });
    }

    let mut total = 0u64;
    let mut hits = 0u64;
    for perm in (0..universe_size).permutations(universe_size) {
        total += 1;
        let min_a = a.iter().map(|t| perm[t as usize]).min();
        let min_b = b.iter().map(|t| perm[t as usize]).min();
        if min_a == min_b {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, total))
}
