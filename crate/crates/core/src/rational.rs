//! Exact non-negative rationals serialized as `{"num": .., "den": ..}`.
//!
//! Components that fit in a `u64` are written as JSON numbers, larger ones as
//! decimal strings; both forms are accepted on input.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Ratio<BigUint>);

impl Exact {
    /// Panics if `den` is zero.
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Self {
        Exact(Ratio::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Exact(Ratio::from_integer(BigUint::zero()))
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if d.is_finite() && n.is_finite() => n / d,
            _ => {
                // scale both down so the quotient survives f64 range
                let shift = self.denom().bits().saturating_sub(1000);
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
                n / d
            }
        }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

fn big_to_json(x: &BigUint) -> serde_json::Value {
    match x.to_u64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Exact", 2)?;
        st.serialize_field("num", &big_to_json(self.numer()))?;
        st.serialize_field("den", &big_to_json(self.denom()))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BigRepr {
    Int(u64),
    Text(String),
}

impl BigRepr {
    fn into_big<E: de::Error>(self) -> Result<BigUint, E> {
        match self {
            BigRepr::Int(v) => Ok(BigUint::from(v)),
            BigRepr::Text(s) => s
                .parse::<BigUint>()
                .map_err(|e| E::custom(format!("bad integer {s:?}: {e}"))),
        }
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: BigRepr,
            den: BigRepr,
        }
        let raw = Raw::deserialize(deserializer)?;
        let num = raw.num.into_big()?;
        let den = raw.den.into_big()?;
        if den.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Exact(Ratio::new(num, den)))
    }
}
