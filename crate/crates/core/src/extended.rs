//! Nonnegative integers extended by a point at infinity.
//!
//! Used for `u(f)` (infinite when every positive power sum vanishes) and for
//! the p-adic valuation of a count (infinite for a zero count).

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NatOrInf {
    Finite(u64),
    Infinite,
}

impl NatOrInf {
    pub fn finite(self) -> Option<u64> {
        match self {
            NatOrInf::Finite(v) => Some(v),
            NatOrInf::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, NatOrInf::Finite(_))
    }

    /// `self >= bound`, with infinity above every integer.
    pub fn at_least(self, bound: u64) -> bool {
        match self {
            NatOrInf::Finite(v) => v >= bound,
            NatOrInf::Infinite => true,
        }
    }
}

impl PartialOrd for NatOrInf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NatOrInf {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NatOrInf::Finite(a), NatOrInf::Finite(b)) => a.cmp(b),
            (NatOrInf::Finite(_), NatOrInf::Infinite) => Ordering::Less,
            (NatOrInf::Infinite, NatOrInf::Finite(_)) => Ordering::Greater,
            (NatOrInf::Infinite, NatOrInf::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for NatOrInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatOrInf::Finite(v) => write!(f, "{v}"),
            NatOrInf::Infinite => f.write_str("inf"),
        }
    }
}

// Wire form: a JSON integer, or the string "inf".
impl Serialize for NatOrInf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            NatOrInf::Finite(v) => serializer.serialize_u64(*v),
            NatOrInf::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NatOrInf {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NatOrInfVisitor;

        impl Visitor<'_> for NatOrInfVisitor {
            type Value = NatOrInf;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<NatOrInf, E> {
                Ok(NatOrInf::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<NatOrInf, E> {
                u64::try_from(v)
                    .map(NatOrInf::Finite)
                    .map_err(|_| E::custom("negative value"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<NatOrInf, E> {
                if v == "inf" {
                    Ok(NatOrInf::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(NatOrInfVisitor)
    }
}
