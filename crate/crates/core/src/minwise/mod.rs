//! Minwise hashing: a seeded family of keyed 64-bit permutations, signatures
//! built from it, and the match-count estimator of Jaccard similarity.
//!
//! # Hash family
//!
//! The `K` random permutations of the token universe are realized as keyed
//! bijections of the 64-bit domain. The construction is fixed so that any
//! implementation following it reproduces the same signatures bit for bit:
//!
//! ```text
//! splitmix64(state):   state += 0x9e3779b97f4a7c15
//!                      z = state
//!                      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!                      z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!                      return z ^ (z >> 31)
//!
//! fmix64(h):           h ^= h >> 33; h *= 0xff51afd7ed558ccd
//!                      h ^= h >> 33; h *= 0xc4ceb9fe1a85ec53
//!                      h ^= h >> 33
//!
//! keys:                state = master_seed
//!                      for i in 0..k: lo_i = splitmix64(state); hi_i = splitmix64(state)
//!
//! mix_i(t):            fmix64(fmix64(t ^ lo_i) ^ hi_i)
//! ```
//!
//! All arithmetic wraps modulo 2^64. Every step of `mix_i` is invertible, so
//! each slot is a true permutation of the 64-bit domain and distinct tokens
//! never tie within a slot. The `lo_i` are outputs of a bijection applied to
//! distinct counter states, so keys are pairwise distinct.

pub mod cache;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::TokenSet;

/// Default number of permutations.
pub const DEFAULT_K: usize = 1000;

/// Slot width of an unreduced signature.
pub const FULL_BITS: u32 = 64;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

/// One 128-bit permutation key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PermutationKey {
    pub lo: u64,
    pub hi: u64,
}

impl PermutationKey {
    #[inline]
    pub fn mix(&self, token: u64) -> u64 {
        fmix64(fmix64(token ^ self.lo) ^ self.hi)
    }
}

/// Identifies the family a signature was produced by, and its slot width.
/// Signatures are only comparable when their `FamilyId`s are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyId {
    pub master_seed: u64,
    pub k: usize,
    pub bits: u32,
}

impl FamilyId {
    /// 64-bit digest of the family parameters.
    pub fn fingerprint(&self) -> u64 {
        let mut state = self.master_seed;
        let a = splitmix64(&mut state);
        fmix64(a ^ fmix64(self.k as u64) ^ (self.bits as u64).rotate_left(32))
    }
}

/// `K` keyed permutations derived from a master seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    master_seed: u64,
    keys: Vec<PermutationKey>,
}

impl HashFamily {
    pub fn new(k: usize, master_seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::NoPermutations);
        }
        let mut state = master_seed;
        let keys = (0..k)
            .map(|_| {
                let lo = splitmix64(&mut state);
                let hi = splitmix64(&mut state);
                PermutationKey { lo, hi }
            })
            .collect();
        Ok(Self { master_seed, keys })
    }

    pub fn k(&self) -> usize {
        self.keys.len()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn keys(&self) -> &[PermutationKey] {
        &self.keys
    }

    pub fn id(&self) -> FamilyId {
        FamilyId {
            master_seed: self.master_seed,
            k: self.k(),
            bits: FULL_BITS,
        }
    }

    /// Signature of a non-empty set: slot `i` is the minimum of `mix_i` over its tokens.
    pub fn sign(&self, set: &TokenSet) -> Result<Signature> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut values = vec![u64::MAX; self.keys.len()];
        for token in set.iter() {
            for (slot, key) in values.iter_mut().zip(&self.keys) {
                let h = key.mix(token);
                if h < *slot {
                    *slot = h;
                }
            }
        }
        Ok(Signature {
            family: self.id(),
            values,
        })
    }

    /// Signs every set in parallel; output order follows input order.
    pub fn sign_all(&self, sets: &[&TokenSet]) -> Result<Vec<Signature>> {
        use rayon::prelude::*;
        sets.par_iter().map(|s| self.sign(s)).collect()
    }
}

/// Shorthand for [`HashFamily::new`].
pub fn make_family(k: usize, master_seed: u64) -> Result<HashFamily> {
    HashFamily::new(k, master_seed)
}

/// Shorthand for [`HashFamily::sign`].
pub fn sign(family: &HashFamily, set: &TokenSet) -> Result<Signature> {
    family.sign(set)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    family: FamilyId,
    values: Vec<u64>,
}

impl Signature {
    /// Reassembles a signature, e.g. when loading a cache. Values wider than
    /// `family.bits` are rejected.
    pub fn from_parts(family: FamilyId, values: Vec<u64>) -> Result<Self> {
        if values.len() != family.k {
            return Err(Error::OutOfRange(format!(
                "signature has {} slots, family expects {}",
                values.len(),
                family.k
            )));
        }
        validate_bits(family.bits)?;
        if family.bits < FULL_BITS && values.iter().any(|v| v >> family.bits != 0) {
            return Err(Error::OutOfRange(format!(
                "slot value wider than {} bits",
                family.bits
            )));
        }
        Ok(Self { family, values })
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn bits(&self) -> u32 {
        self.family.bits
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn is_comparable(&self, other: &Signature) -> bool {
        self.family == other.family
    }

    /// Keeps the lowest `bits` bits of every slot. `bits` is 1..=32, or 64
    /// for the identity.
    ///
    /// For a pair with Jaccard `J`, a b-bit slot matches with probability
    /// about `2^-b + (1 - 2^-b) J`: a true min-collision always matches, and
    /// otherwise two independent uniform values agree on `b` bits by chance.
    pub fn to_b_bit(&self, bits: u32) -> Result<Signature> {
        validate_bits(bits)?;
        if bits > self.family.bits {
            return Err(Error::OutOfRange(format!(
                "cannot widen a {}-bit signature to {} bits",
                self.family.bits, bits
            )));
        }
        let mask = if bits == FULL_BITS {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        Ok(Signature {
            family: FamilyId {
                bits,
                ..self.family
            },
            values: self.values.iter().map(|v| v & mask).collect(),
        })
    }
}

pub(crate) fn validate_bits(bits: u32) -> Result<()> {
    if (1..=32).contains(&bits) || bits == FULL_BITS {
        Ok(())
    } else {
        Err(Error::InvalidBits(bits))
    }
}

/// Shorthand for [`Signature::to_b_bit`].
pub fn to_b_bit(sig: &Signature, bits: u32) -> Result<Signature> {
    sig.to_b_bit(bits)
}

/// Number of equal slots among the first `k_examined` slots of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCount {
    pub x: usize,
    pub k_examined: usize,
}

impl MatchCount {
    /// Running estimate `x / k_examined`.
    pub fn estimate(&self) -> Result<f64> {
        if self.k_examined == 0 {
            return Err(Error::NoSlotsExamined);
        }
        Ok(self.x as f64 / self.k_examined as f64)
    }
}

/// Counts equal slots in the prefix `0..upto`.
pub fn match_count(a: &Signature, b: &Signature, upto: usize) -> Result<MatchCount> {
    if !a.is_comparable(b) {
        return Err(Error::FamilyMismatch);
    }
    let k = a.k();
    if upto > k {
        return Err(Error::PrefixTooLong { upto, k });
    }
    let x = a.values[..upto]
        .iter()
        .zip(&b.values[..upto])
        .filter(|(u, v)| u == v)
        .count();
    Ok(MatchCount {
        x,
        k_examined: upto,
    })
}

/// Shorthand for [`MatchCount::estimate`].
pub fn estimate(mc: &MatchCount) -> Result<f64> {
    mc.estimate()
}

/// Variance `J(1 - J) / K` of the full-length estimator.
pub fn estimator_variance(j: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&j) {
        return Err(Error::OutOfRange(format!("similarity {j} not in [0, 1]")));
    }
    if k == 0 {
        return Err(Error::NoPermutations);
    }
    Ok(j * (1.0 - j) / k as f64)
}

/// Expected per-slot match probability of a b-bit signature pair with Jaccard `j`.
pub fn b_bit_match_probability(j: f64, bits: u32) -> f64 {
    if bits >= FULL_BITS {
        return j;
    }
    let chance = 0.5f64.powi(bits as i32);
    chance + (1.0 - chance) * j
}
