use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation in δ of an `(a, b)` reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeltaOrder {
    Finite(u8),
    /// Every order of δ, with `H_k(1, φ)` evaluated exactly.
    Exact,
}

/// `(a, b)`: keep terms up to `K^a` and `δ^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReductionOrder {
    a: u8,
    b: DeltaOrder,
}

impl ReductionOrder {
    pub fn new(a: u8, b: DeltaOrder) -> Result<Self> {
        if a > 2 {
            return Err(Error::Unsupported(format!(
                "reductions of order {a} in K are not implemented (max 2)"
            )));
        }
        match b {
            DeltaOrder::Finite(b) if b > 2 => Err(Error::Unsupported(format!(
                "reductions of order {b} in δ are not implemented (max 2)"
            ))),
            DeltaOrder::Exact if a != 1 => Err(Error::Unsupported(format!(
                "the exact-in-δ reduction exists only at first order in K, not ({a},inf)"
            ))),
            _ => Ok(Self { a, b }),
        }
    }

    pub fn finite(a: u8, b: u8) -> Result<Self> {
        Self::new(a, DeltaOrder::Finite(b))
    }

    /// The `(1,∞)` reduction.
    pub fn first_exact() -> Self {
        Self {
            a: 1,
            b: DeltaOrder::Exact,
        }
    }

    pub fn k_order(&self) -> u8 {
        self.a
    }

    pub fn delta_order(&self) -> DeltaOrder {
        self.b
    }

    pub fn is_exact_in_delta(&self) -> bool {
        self.b == DeltaOrder::Exact
    }

    /// Highest finite δ order whose polynomial terms are needed.
    pub(crate) fn max_finite_delta(&self) -> usize {
        match self.b {
            DeltaOrder::Finite(b) => b as usize,
            DeltaOrder::Exact => 0,
        }
    }
}

impl fmt::Display for ReductionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.b {
            DeltaOrder::Finite(b) => write!(f, "({},{})", self.a, b),
            DeltaOrder::Exact => write!(f, "({},inf)", self.a),
        }
    }
}

impl FromStr for ReductionOrder {
    type Err = Error;

    /// Accepts `"2,2"`, `"(2,2)"`, `"1,inf"` and `"(1,∞)"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse reduction order '{s}'"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: u8 = a.trim().parse().map_err(|_| bad())?;
        let b = match b.trim() {
            "inf" | "∞" | "infinity" => DeltaOrder::Exact,
            other => DeltaOrder::Finite(other.parse().map_err(|_| bad())?),
        };
        Self::new(a, b)
    }
}

impl Serialize for ReductionOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReductionOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
