use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// A natural number or infinity. Addition saturates at `Inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

pub use ExtNat::{Fin, Inf};

impl ExtNat {
    pub const ZERO: ExtNat = Fin(0);

    pub fn is_inf(self) -> bool {
        matches!(self, Inf)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(v) => Some(v),
            Inf => None,
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Fin(v) => json!(v),
            Inf => json!("inf"),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) if s == "inf" => Ok(Inf),
            Value::Number(n) => n.as_u64().map(Fin).ok_or_else(|| {
                Error::Parse(format!(
                    "extended natural must be a non-negative integer, got {n}"
                ))
            }),
            other => Err(Error::Parse(format!(
                "expected extended natural, got {other}"
            ))),
        }
    }
}

impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Fin(a), Fin(b)) => Fin(a.checked_add(b).expect("finite ExtNat sum overflowed u64")),
            _ => Inf,
        }
    }
}

impl Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(ExtNat::ZERO, |acc, x| acc + x)
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Fin(a), Fin(b)) => a.cmp(b),
            (Fin(_), Inf) => Ordering::Less,
            (Inf, Fin(_)) => Ordering::Greater,
            (Inf, Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for ExtNat {
    fn from(v: u64) -> Self {
        Fin(v)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(v) => write!(f, "{v}"),
            Inf => f.write_str("inf"),
        }
    }
}

/// Saturating sum of a list.
pub fn extnat_sum(values: &[ExtNat]) -> ExtNat {
    values.iter().copied().sum()
}
