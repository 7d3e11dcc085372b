//! Runtime values and semantic types of the default calculus.
//!
//! Numbers are exact: integers are arbitrary precision, decimals are
//! rationals, and money is an integer count of cents.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};

/// Semantic type of an expression or declaration.
///
/// Enumerations and structures are nominal: their variants and fields live in
/// the program's declarations and are looked up by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemType {
    Bool,
    Int,
    Rat,
    Money,
    Enum(String),
    Struct(String),
    Func(Vec<SemType>, Box<SemType>),
}

impl SemType {
    pub fn is_numeric(&self) -> bool {
        matches!(self, SemType::Int | SemType::Rat | SemType::Money)
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Bool => f.write_str("bool"),
            SemType::Int => f.write_str("int"),
            SemType::Rat => f.write_str("rat"),
            SemType::Money => f.write_str("money"),
            SemType::Enum(n) | SemType::Struct(n) => f.write_str(n),
            SemType::Func(params, ret) => {
                f.write_str("(")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ") -> {ret}")
            }
        }
    }
}

/// A value of the default calculus.
///
/// `Empty` (no applicable rule) and `Conflict` (two exceptions fired, or a
/// runtime error) are outcome-level values: they never sit inside an enum
/// payload or a structure field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Rat(BigRational),
    /// Integer number of cents.
    Money(BigInt),
    Enum {
        ty: String,
        variant: String,
        payload: Option<Box<Value>>,
    },
    Struct {
        ty: String,
        fields: Vec<(String, Value)>,
    },
    Empty,
    Conflict,
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn money_cents(n: i64) -> Value {
        Value::Money(BigInt::from(n))
    }

    pub fn rat(num: i64, den: i64) -> Value {
        Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_abnormal(&self) -> bool {
        matches!(self, Value::Empty | Value::Conflict)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Value::Money(c) => f.write_str(&format_money(c)),
            Value::Enum {
                ty,
                variant,
                payload,
            } => {
                write!(f, "{ty}::{variant}")?;
                if let Some(p) = payload {
                    write!(f, "({p})")?;
                }
                Ok(())
            }
            Value::Struct { ty, fields } => {
                write!(f, "{ty} {{ ")?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {v}")?;
                }
                f.write_str(" }")
            }
            Value::Empty => f.write_str("empty"),
            Value::Conflict => f.write_str("conflict"),
        }
    }
}

/// Rounds to the nearest integer, halves away from zero:
/// `q >= 0 ? floor(q + 1/2) : -floor(-q + 1/2)`.
pub fn round_rat(q: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if !q.is_negative() {
        (q + &half).floor().to_integer()
    } else {
        -((-q + &half).floor().to_integer())
    }
}

pub fn floor_rat(q: &BigRational) -> BigInt {
    q.floor().to_integer()
}

/// Formats cents as `$1,234.56` (or `-$0.05`).
pub fn format_money(cents: &BigInt) -> String {
    let neg = cents.is_negative();
    let abs = cents.abs();
    let (units, rem) = abs.div_rem(&BigInt::from(100));
    let digits = units.to_string();
    let mut grouped = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    let rem = rem.to_u32().unwrap_or(0);
    format!("{}${}.{:02}", if neg { "-" } else { "" }, grouped, rem)
}

/// Converts an integer or rational value into a rational.
pub fn to_rational(v: &Value) -> Option<BigRational> {
    match v {
        Value::Int(n) => Some(BigRational::from_integer(n.clone())),
        Value::Rat(q) => Some(q.clone()),
        _ => None,
    }
}

pub fn is_integral(q: &BigRational) -> bool {
    q.denom().is_one()
}

pub fn rat_zero() -> BigRational {
    BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn round_half_away_from_zero() {
        assert_eq!(round_rat(&q(5, 2)), BigInt::from(3));
        assert_eq!(round_rat(&q(-1, 2)), BigInt::from(-1));
        assert_eq!(round_rat(&q(0, 1)), BigInt::from(0));
        assert_eq!(round_rat(&q(-5, 2)), BigInt::from(-3));
        assert_eq!(round_rat(&q(7, 3)), BigInt::from(2));
        assert_eq!(round_rat(&q(-7, 3)), BigInt::from(-2));
    }

    #[test]
    fn money_formatting() {
        assert_eq!(format_money(&BigInt::from(123456)), "$1,234.56");
        assert_eq!(format_money(&BigInt::from(0)), "$0.00");
        assert_eq!(format_money(&BigInt::from(-5)), "-$0.05");
        assert_eq!(format_money(&BigInt::from(100000000)), "$1,000,000.00");
        assert_eq!(format_money(&BigInt::from(1000001)), "$10,000.01");
    }

    proptest::proptest! {
        #[test]
        fn round_is_odd(n in -100_000i64..100_000, d in 1i64..500) {
            let x = q(n, d);
            let neg = -x.clone();
            proptest::prop_assert_eq!(round_rat(&x) + round_rat(&neg), BigInt::zero());
        }

        #[test]
        fn round_matches_nearest(n in -100_000i64..100_000, d in 1i64..500) {
            let x = q(n, d);
            let r = BigRational::from_integer(round_rat(&x));
            let dist = (&r - &x).abs();
            proptest::prop_assert!(dist <= q(1, 2));
        }
    }
}
