//! Exact truth values and clause factors.
//!
//! All membership degrees, clause factors and node values are exact
//! rationals so that comparisons between the fixpoint oracle and the proof
//! search are bit-exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Maximum number of fractional digits accepted in a decimal literal.
pub const MAX_FRACTION_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("decimal `{0}` has more than {MAX_FRACTION_DIGITS} fractional digits")]
    TooPrecise(String),
    #[error("value {0} lies outside [0,1]")]
    OutOfUnitInterval(String),
    #[error("factor {0} lies outside (0,1]")]
    FactorOutOfRange(String),
}

/// An exact rational number. Truth values live in `[0,1]`; intermediate
/// arithmetic never leaves that interval because only `min`, `max` and
/// products of unit-interval values are formed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(BigRational);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn one() -> Self {
        Value(BigRational::one())
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Value(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Value(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn in_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn mul(&self, other: &Value) -> Value {
        Value(&self.0 * &other.0)
    }

    pub fn min_of(&self, other: &Value) -> Value {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max_of(&self, other: &Value) -> Value {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded half-up to `places` fractional digits.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
        let digits = rounded.to_integer();
        let (int_part, frac_part) = (&digits / &scale, &digits % &scale);
        if places == 0 {
            return int_part.to_string();
        }
        format!("{}.{:0>width$}", int_part, frac_part.to_string(), width = places)
    }

    /// Parses either a decimal literal (`0.7`, `1`, `.25`) with at most
    /// [`MAX_FRACTION_DIGITS`] fractional digits or an exact `p/q`.
    pub fn parse(text: &str) -> Result<Value, ValueError> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| ValueError::Malformed(text.to_string()))?;
            let d: BigInt = d
                .trim()
                .parse()
                .map_err(|_| ValueError::Malformed(text.to_string()))?;
            if d.is_zero() || n.is_negative() || d.is_negative() {
                return Err(ValueError::Malformed(text.to_string()));
            }
            return Ok(Value(BigRational::new(n, d)));
        }
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let well_formed = !(int_part.is_empty() && frac_part.is_empty())
            && int_part.chars().all(|c| c.is_ascii_digit())
            && frac_part.chars().all(|c| c.is_ascii_digit())
            && !(text.ends_with('.') && frac_part.is_empty());
        if !well_formed {
            return Err(ValueError::Malformed(text.to_string()));
        }
        if frac_part.len() > MAX_FRACTION_DIGITS {
            return Err(ValueError::TooPrecise(text.to_string()));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| ValueError::Malformed(text.to_string()))?
        };
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Value(BigRational::new(numer, denom)))
    }

    /// Renders as a decimal literal when the denominator divides
    /// `10^MAX_FRACTION_DIGITS`, otherwise as `p/q`. Parsing the result
    /// yields the same value.
    pub fn to_literal(&self) -> String {
        for places in 0..=MAX_FRACTION_DIGITS {
            let scale = BigInt::from(10u32).pow(places as u32);
            let scaled = &self.0 * BigRational::from_integer(scale.clone());
            if !scaled.is_integer() {
                continue;
            }
            let digits = scaled.to_integer();
            if places == 0 {
                return digits.to_string();
            }
            return format!(
                "{}.{:0>width$}",
                &digits / &scale,
                (&digits % &scale).to_string(),
                width = places
            );
        }
        self.to_string()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Value {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Value::parse(s)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Value::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A clause factor, an exact rational in `(0,1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Factor(Value);

impl Factor {
    pub fn new(value: Value) -> Result<Factor, ValueError> {
        if value.is_zero() || !value.in_unit_interval() {
            return Err(ValueError::FactorOutOfRange(value.to_string()));
        }
        Ok(Factor(value))
    }

    pub fn one() -> Factor {
        Factor(Value::one())
    }

    /// Convenience for literals known to be in range.
    pub fn ratio(numer: i64, denom: i64) -> Factor {
        Factor::new(Value::ratio(numer, denom)).expect("factor literal out of (0,1]")
    }

    pub fn parse(text: &str) -> Result<Factor, ValueError> {
        Factor::new(Value::parse(text)?)
    }

    pub fn value(&self) -> &Value {
        &self.0
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// How the values of a clause's body atoms are aggregated before scaling
/// by the clause factor. Disjunction over alternative clauses is always
/// `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationMode {
    #[default]
    Min,
    Product,
}

impl CombinationMode {
    /// Binary aggregation step.
    pub fn combine(self, a: &Value, b: &Value) -> Value {
        match self {
            CombinationMode::Min => a.min_of(b),
            CombinationMode::Product => a.mul(b),
        }
    }

    /// Aggregates body values; the empty aggregate is 1.
    pub fn aggregate<'a, I: IntoIterator<Item = &'a Value>>(self, values: I) -> Value {
        values
            .into_iter()
            .fold(Value::one(), |acc, v| self.combine(&acc, v))
    }

    /// `factor × aggregate(values)`.
    pub fn apply<'a, I: IntoIterator<Item = &'a Value>>(self, factor: &Factor, values: I) -> Value {
        factor.value().mul(&self.aggregate(values))
    }
}

impl fmt::Display for CombinationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinationMode::Min => f.write_str("min"),
            CombinationMode::Product => f.write_str("product"),
        }
    }
}

impl FromStr for CombinationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(CombinationMode::Min),
            "product" => Ok(CombinationMode::Product),
            other => Err(format!("unknown combination mode `{other}` (expected min|product)")),
        }
    }
}
