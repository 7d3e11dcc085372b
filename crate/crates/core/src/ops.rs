//! Operator typing and concrete operator semantics, shared by the reference
//! interpreter, the concolic evaluator and model checking in the solver.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::ast::{BinOp, UnOp};
use crate::value::{floor_rat, round_rat, to_rational, SemType, Value};

/// Result type of a binary operator, or a message describing the mismatch.
pub fn binop_type(op: BinOp, l: &SemType, r: &SemType) -> Result<SemType, String> {
    use SemType::*;
    let mismatch = || {
        Err(format!(
            "operator `{}` cannot be applied to {l} and {r}",
            op.symbol()
        ))
    };
    match op {
        BinOp::And | BinOp::Or => match (l, r) {
            (Bool, Bool) => Ok(Bool),
            _ => mismatch(),
        },
        BinOp::Eq | BinOp::Ne => {
            if l == r || (is_int_or_rat(l) && is_int_or_rat(r)) {
                if matches!(l, Func(..)) {
                    return mismatch();
                }
                Ok(Bool)
            } else {
                mismatch()
            }
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (l, r) {
            (Money, Money) => Ok(Bool),
            _ if is_int_or_rat(l) && is_int_or_rat(r) => Ok(Bool),
            _ => mismatch(),
        },
        BinOp::Add | BinOp::Sub => match (l, r) {
            (Int, Int) => Ok(Int),
            (Money, Money) => Ok(Money),
            _ if is_int_or_rat(l) && is_int_or_rat(r) => Ok(Rat),
            _ => mismatch(),
        },
        BinOp::Mul => match (l, r) {
            (Int, Int) => Ok(Int),
            (Money, Int) | (Int, Money) | (Money, Rat) | (Rat, Money) => Ok(Money),
            _ if is_int_or_rat(l) && is_int_or_rat(r) => Ok(Rat),
            _ => mismatch(),
        },
        BinOp::Div => match (l, r) {
            (Money, Money) => Ok(Rat),
            (Money, Int) | (Money, Rat) => Ok(Money),
            _ if is_int_or_rat(l) && is_int_or_rat(r) => Ok(Rat),
            _ => mismatch(),
        },
    }
}

pub fn unop_type(op: UnOp, t: &SemType) -> Result<SemType, String> {
    match (op, t) {
        (UnOp::Not, SemType::Bool) => Ok(SemType::Bool),
        (UnOp::Neg, SemType::Int | SemType::Rat | SemType::Money) => Ok(t.clone()),
        (UnOp::Round | UnOp::Floor, SemType::Int | SemType::Rat) => Ok(SemType::Int),
        _ => Err(format!("operator {op:?} cannot be applied to {t}")),
    }
}

fn is_int_or_rat(t: &SemType) -> bool {
    matches!(t, SemType::Int | SemType::Rat)
}

/// Structural equality, identifying integers with integral rationals.
pub fn values_equal(l: &Value, r: &Value) -> bool {
    match (to_rational(l), to_rational(r)) {
        (Some(a), Some(b)) => a == b,
        _ => l == r,
    }
}

/// Applies a binary operator to two normal values. Division by zero and
/// ill-typed operands give `Conflict`.
pub fn eval_binop(op: BinOp, l: &Value, r: &Value) -> Value {
    use Value::*;
    match op {
        BinOp::And => match (l, r) {
            (Bool(a), Bool(b)) => Bool(*a && *b),
            _ => Conflict,
        },
        BinOp::Or => match (l, r) {
            (Bool(a), Bool(b)) => Bool(*a || *b),
            _ => Conflict,
        },
        BinOp::Eq => Bool(values_equal(l, r)),
        BinOp::Ne => Bool(!values_equal(l, r)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = match (l, r) {
                (Money(a), Money(b)) => a.cmp(b),
                _ => match (to_rational(l), to_rational(r)) {
                    (Some(a), Some(b)) => a.cmp(&b),
                    _ => return Conflict,
                },
            };
            Bool(match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Le => ord.is_le(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        BinOp::Add | BinOp::Sub => {
            let sub = op == BinOp::Sub;
            match (l, r) {
                (Int(a), Int(b)) => Int(if sub { a - b } else { a + b }),
                (Money(a), Money(b)) => Money(if sub { a - b } else { a + b }),
                _ => match (to_rational(l), to_rational(r)) {
                    (Some(a), Some(b)) => Rat(if sub { a - b } else { a + b }),
                    _ => Conflict,
                },
            }
        }
        BinOp::Mul => match (l, r) {
            (Int(a), Int(b)) => Int(a * b),
            (Money(m), Int(n)) | (Int(n), Money(m)) => Money(m * n),
            (Money(m), Rat(q)) | (Rat(q), Money(m)) => {
                Money(round_rat(&(BigRational::from_integer(m.clone()) * q)))
            }
            _ => match (to_rational(l), to_rational(r)) {
                (Some(a), Some(b)) => Rat(a * b),
                _ => Conflict,
            },
        },
        BinOp::Div => match (l, r) {
            (Money(a), Money(b)) => {
                if b.is_zero() {
                    Conflict
                } else {
                    Rat(BigRational::new(a.clone(), b.clone()))
                }
            }
            (Money(m), d @ (Int(_) | Rat(_))) => {
                let d = to_rational(d).expect("numeric");
                if d.is_zero() {
                    Conflict
                } else {
                    Money(round_rat(&(BigRational::from_integer(m.clone()) / d)))
                }
            }
            _ => match (to_rational(l), to_rational(r)) {
                (Some(_), Some(b)) if b.is_zero() => Conflict,
                (Some(a), Some(b)) => Rat(a / b),
                _ => Conflict,
            },
        },
    }
}

pub fn eval_unop(op: UnOp, v: &Value) -> Value {
    match (op, v) {
        (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
        (UnOp::Neg, Value::Int(n)) => Value::Int(-n),
        (UnOp::Neg, Value::Rat(q)) => Value::Rat(-q),
        (UnOp::Neg, Value::Money(c)) => Value::Money(-c),
        (UnOp::Round, Value::Int(n)) | (UnOp::Floor, Value::Int(n)) => Value::Int(n.clone()),
        (UnOp::Round, Value::Rat(q)) => Value::Int(round_rat(q)),
        (UnOp::Floor, Value::Rat(q)) => Value::Int(floor_rat(q)),
        _ => Value::Conflict,
    }
}

/// True when the value is numerically zero (the divisor test).
pub fn is_zero_value(v: &Value) -> bool {
    match v {
        Value::Int(n) | Value::Money(n) => n.is_zero(),
        Value::Rat(q) => q.is_zero(),
        _ => false,
    }
}

pub fn zero_of(t: &SemType) -> Option<Value> {
    match t {
        SemType::Int => Some(Value::Int(BigInt::zero())),
        SemType::Rat => Some(Value::Rat(BigRational::zero())),
        SemType::Money => Some(Value::Money(BigInt::zero())),
        _ => None,
    }
}
