//! Exact p-adic valuations on integer scalars and the extended natural
//! numbers used for heights.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// A natural number extended by a single infinite value.
///
/// Heights and valuations live here: the zero element of a module has
/// infinite height, every other quantity is a small finite integer. The
/// infinite value is a distinct variant, never a sentinel integer, so
/// comparisons cannot be fooled by overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Finite(u32),
    Infinity,
}

impl ExtNat {
    /// The finite value, or `None` for infinity.
    pub fn finite(self) -> Option<u32> {
        match self {
            ExtNat::Finite(v) => Some(v),
            ExtNat::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtNat::Infinity)
    }
}

impl From<u32> for ExtNat {
    fn from(v: u32) -> Self {
        ExtNat::Finite(v)
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtNat::Finite(a), ExtNat::Finite(b)) => a.cmp(b),
            (ExtNat::Finite(_), ExtNat::Infinity) => Ordering::Less,
            (ExtNat::Infinity, ExtNat::Finite(_)) => Ordering::Greater,
            (ExtNat::Infinity, ExtNat::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Saturating addition: anything plus infinity is infinity.
impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (ExtNat::Finite(a), ExtNat::Finite(b)) => ExtNat::Finite(a + b),
            _ => ExtNat::Infinity,
        }
    }
}

impl Add<u32> for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: u32) -> ExtNat {
        self + ExtNat::Finite(rhs)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::Infinity => write!(f, "inf"),
        }
    }
}

/// Valuation context for a fixed prime p.
///
/// Scalars are plain integers; only their p-valuation and unit part matter
/// for module arithmetic, so this models a discrete valuation domain
/// faithfully for everything the library computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarValuation {
    prime: u64,
}

impl ScalarValuation {
    /// Rejects `p < 2` and composite `p`.
    pub fn new(prime: u64) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        Ok(ScalarValuation { prime })
    }

    pub fn prime(self) -> u64 {
        self.prime
    }

    /// Largest s with p^s dividing `a`; infinite for `a = 0`.
    pub fn valuation(self, a: i64) -> ExtNat {
        if a == 0 {
            return ExtNat::Infinity;
        }
        let mut v = 0u32;
        let mut rest = (a as i128).unsigned_abs();
        let p = self.prime as u128;
        while rest.is_multiple_of(p) {
            rest /= p;
            v += 1;
        }
        ExtNat::Finite(v)
    }

    /// True iff `a` is a unit in the localized ring, i.e. v(a) = 0.
    pub fn is_unit(self, a: i64) -> bool {
        self.valuation(a) == ExtNat::Finite(0)
    }
}

/// Largest s with p^s dividing `a`; infinite for `a = 0`.
/// Rejects `p < 2` and composite `p`.
pub fn valuation(p: u64, a: i64) -> Result<ExtNat> {
    Ok(ScalarValuation::new(p)?.valuation(a))
}

/// True iff `a` is coprime to `p` (and nonzero).
pub fn is_unit(p: u64, a: i64) -> bool {
    debug_assert!(p >= 2);
    a != 0 && !(a as i128).unsigned_abs().is_multiple_of(p as u128)
}

/// Trial-division primality; module orders are small enough that nothing
/// faster is warranted.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
