//! Symbolic terms over scope inputs, and the branch records that make up a
//! path condition.
//!
//! Money is represented as an integer number of cents, rationals as reals.
//! Smart constructors fold constant operands so that branches which do not
//! depend on inputs show up as constant literals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::ast::{BinOp, Span, UnOp};
use crate::ops::{eval_binop, eval_unop, values_equal};
use crate::value::{SemType, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Real,
    Enum(String),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
            Sort::Enum(n) => f.write_str(n),
        }
    }
}

/// Sort used to model a scalar semantic type.
pub fn sort_of(t: &SemType) -> Option<Sort> {
    match t {
        SemType::Bool => Some(Sort::Bool),
        SemType::Int | SemType::Money => Some(Sort::Int),
        SemType::Rat => Some(Sort::Real),
        SemType::Enum(n) => Some(Sort::Enum(n.clone())),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn from_binop(op: BinOp) -> Option<CmpOp> {
        Some(match op {
            BinOp::Eq => CmpOp::Eq,
            BinOp::Ne => CmpOp::Ne,
            BinOp::Lt => CmpOp::Lt,
            BinOp::Le => CmpOp::Le,
            BinOp::Gt => CmpOp::Gt,
            BinOp::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn binop(self) -> BinOp {
        match self {
            CmpOp::Eq => BinOp::Eq,
            CmpOp::Ne => BinOp::Ne,
            CmpOp::Lt => BinOp::Lt,
            CmpOp::Le => BinOp::Le,
            CmpOp::Gt => BinOp::Gt,
            CmpOp::Ge => BinOp::Ge,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
    /// Enumeration name and variant.
    EnumConst(String, String),
    Var(String, Sort),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Real division.
    Div(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    ToReal(Box<Term>),
    Floor(Box<Term>),
    Round(Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    /// The enum-sorted term's variant is one of the listed names (sorted).
    InVariants(Box<Term>, Vec<String>),
}

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(name.to_string(), sort)
    }

    pub fn int(n: i64) -> Term {
        Term::Int(BigInt::from(n))
    }

    pub fn real(q: BigRational) -> Term {
        Term::Real(q)
    }

    pub fn is_const(&self) -> bool {
        matches!(
            self,
            Term::Bool(_) | Term::Int(_) | Term::Real(_) | Term::EnumConst(..)
        )
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Term::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Bool(_)
            | Term::Cmp(..)
            | Term::Not(_)
            | Term::And(_)
            | Term::Or(_)
            | Term::InVariants(..) => Sort::Bool,
            Term::Int(_) | Term::Floor(_) | Term::Round(_) => Sort::Int,
            Term::Real(_) | Term::ToReal(_) | Term::Div(..) => Sort::Real,
            Term::EnumConst(e, _) => Sort::Enum(e.clone()),
            Term::Var(_, s) => s.clone(),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                if a.sort() == Sort::Int && b.sort() == Sort::Int {
                    Sort::Int
                } else {
                    Sort::Real
                }
            }
            Term::Neg(a) => a.sort(),
        }
    }

    /// The constant term denoting a scalar value, if any.
    pub fn from_value(v: &Value) -> Option<Term> {
        match v {
            Value::Bool(b) => Some(Term::Bool(*b)),
            Value::Int(n) | Value::Money(n) => Some(Term::Int(n.clone())),
            Value::Rat(q) => Some(Term::Real(q.clone())),
            Value::Enum { ty, variant, .. } => Some(Term::EnumConst(ty.clone(), variant.clone())),
            _ => None,
        }
    }

    fn const_value(&self) -> Option<Value> {
        match self {
            Term::Bool(b) => Some(Value::Bool(*b)),
            Term::Int(n) => Some(Value::Int(n.clone())),
            Term::Real(q) => Some(Value::Rat(q.clone())),
            Term::EnumConst(e, v) => Some(Value::Enum {
                ty: e.clone(),
                variant: v.clone(),
                payload: None,
            }),
            _ => None,
        }
    }

    fn from_const_value(v: Value) -> Option<Term> {
        match v {
            Value::Bool(b) => Some(Term::Bool(b)),
            Value::Int(n) => Some(Term::Int(n)),
            Value::Rat(q) => Some(Term::Real(q)),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Term::Int(n) => n.is_zero(),
            Term::Real(q) => q.is_zero(),
            _ => false,
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Term::Int(n) => n.is_one(),
            Term::Real(q) => q.is_one(),
            _ => false,
        }
    }

    pub fn to_real(t: Term) -> Term {
        match t {
            Term::Int(n) => Term::Real(BigRational::from_integer(n)),
            t if t.sort() == Sort::Real => t,
            t => Term::ToReal(Box::new(t)),
        }
    }

    fn arith(op: BinOp, a: Term, b: Term) -> Term {
        if let (Some(x), Some(y)) = (a.const_value(), b.const_value()) {
            if let Some(t) = Term::from_const_value(eval_binop(op, &x, &y)) {
                return t;
            }
        }
        let (a, b) = if a.sort() != b.sort() {
            (Term::to_real(a), Term::to_real(b))
        } else {
            (a, b)
        };
        match op {
            BinOp::Add if a.is_zero() => b,
            BinOp::Add | BinOp::Sub if b.is_zero() => a,
            BinOp::Mul if a.is_one() => b,
            BinOp::Mul if b.is_one() => a,
            BinOp::Mul if a.is_zero() => a,
            BinOp::Mul if b.is_zero() => b,
            BinOp::Add => Term::Add(Box::new(a), Box::new(b)),
            BinOp::Sub => Term::Sub(Box::new(a), Box::new(b)),
            BinOp::Mul => Term::Mul(Box::new(a), Box::new(b)),
            _ => unreachable!("arith on {op:?}"),
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::arith(BinOp::Add, a, b)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::arith(BinOp::Sub, a, b)
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::arith(BinOp::Mul, a, b)
    }

    /// Real division; callers guarantee a nonzero divisor on the path.
    pub fn div(a: Term, b: Term) -> Term {
        let (a, b) = (Term::to_real(a), Term::to_real(b));
        match (&a, &b) {
            (Term::Real(x), Term::Real(y)) if !y.is_zero() => Term::Real(x / y),
            (_, Term::Real(y)) if y.is_one() => a,
            _ => Term::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Term) -> Term {
        match a {
            Term::Int(n) => Term::Int(-n),
            Term::Real(q) => Term::Real(-q),
            Term::Neg(x) => *x,
            a => Term::Neg(Box::new(a)),
        }
    }

    pub fn floor(a: Term) -> Term {
        match a {
            Term::Real(q) => Term::Int(q.floor().to_integer()),
            a if a.sort() == Sort::Int => a,
            Term::ToReal(x) => *x,
            a => Term::Floor(Box::new(a)),
        }
    }

    pub fn round(a: Term) -> Term {
        match a {
            Term::Real(q) => Term::Int(crate::value::round_rat(&q)),
            a if a.sort() == Sort::Int => a,
            Term::ToReal(x) => *x,
            a => Term::Round(Box::new(a)),
        }
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Term {
        if let (Some(x), Some(y)) = (a.const_value(), b.const_value()) {
            let r = match op {
                CmpOp::Eq => values_equal(&x, &y),
                CmpOp::Ne => !values_equal(&x, &y),
                _ => eval_binop(op.binop(), &x, &y) == Value::Bool(true),
            };
            return Term::Bool(r);
        }
        let numeric = |s: &Sort| matches!(s, Sort::Int | Sort::Real);
        let (sa, sb) = (a.sort(), b.sort());
        let (a, b) = if sa != sb && numeric(&sa) && numeric(&sb) {
            (Term::to_real(a), Term::to_real(b))
        } else {
            (a, b)
        };
        Term::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn not(a: Term) -> Term {
        match a {
            Term::Bool(b) => Term::Bool(!b),
            Term::Not(x) => *x,
            a => Term::Not(Box::new(a)),
        }
    }

    pub fn and(items: Vec<Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Bool(true) => {}
                Term::Bool(false) => return Term::Bool(false),
                Term::And(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Bool(true),
            1 => out.pop().expect("one"),
            _ => Term::And(out),
        }
    }

    pub fn or(items: Vec<Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Bool(false) => {}
                Term::Bool(true) => return Term::Bool(true),
                Term::Or(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Bool(false),
            1 => out.pop().expect("one"),
            _ => Term::Or(out),
        }
    }

    pub fn in_variants(t: Term, mut names: Vec<String>) -> Term {
        names.sort();
        names.dedup();
        if let Term::EnumConst(_, v) = &t {
            return Term::Bool(names.contains(v));
        }
        Term::InVariants(Box::new(t), names)
    }

    /// Applies an arithmetic or comparison operator of the source language.
    pub fn binop(op: BinOp, a: Term, b: Term) -> Term {
        match op {
            BinOp::Add => Term::add(a, b),
            BinOp::Sub => Term::sub(a, b),
            BinOp::Mul => Term::mul(a, b),
            BinOp::Div => Term::div(a, b),
            BinOp::And => Term::and(vec![a, b]),
            BinOp::Or => Term::or(vec![a, b]),
            _ => Term::cmp(CmpOp::from_binop(op).expect("comparison"), a, b),
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Bool(_) | Term::Int(_) | Term::Real(_) | Term::EnumConst(..) | Term::Var(..) => {
                Vec::new()
            }
            Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Mul(a, b)
            | Term::Div(a, b)
            | Term::Cmp(_, a, b) => {
                vec![a, b]
            }
            Term::Neg(a)
            | Term::ToReal(a)
            | Term::Floor(a)
            | Term::Round(a)
            | Term::Not(a)
            | Term::InVariants(a, _) => vec![a],
            Term::And(xs) | Term::Or(xs) => xs.iter().collect(),
        }
    }

    pub fn vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<(String, Sort)>) {
        if let Term::Var(n, s) = self {
            out.insert((n.clone(), s.clone()));
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Term::Var(..) => true,
            _ => self.children().iter().any(|c| c.has_vars()),
        }
    }

    pub fn contains_round_or_floor(&self) -> bool {
        matches!(self, Term::Round(_) | Term::Floor(_))
            || self.children().iter().any(|c| c.contains_round_or_floor())
    }

    /// Evaluates under a model with the operator semantics of the source
    /// language. `None` when a variable is missing or a division by zero
    /// occurs.
    pub fn eval(&self, model: &BTreeMap<String, Value>) -> Option<Value> {
        Some(money_as_int(match self {
            Term::Var(n, _) => model.get(n)?.clone(),
            Term::Add(a, b) => eval_binop(BinOp::Add, &a.eval(model)?, &b.eval(model)?),
            Term::Sub(a, b) => eval_binop(BinOp::Sub, &a.eval(model)?, &b.eval(model)?),
            Term::Mul(a, b) => eval_binop(BinOp::Mul, &a.eval(model)?, &b.eval(model)?),
            Term::Div(a, b) => {
                let v = eval_binop(BinOp::Div, &a.eval(model)?, &b.eval(model)?);
                if v == Value::Conflict {
                    return None;
                }
                v
            }
            Term::Neg(a) => eval_unop(UnOp::Neg, &a.eval(model)?),
            Term::ToReal(a) => match a.eval(model)? {
                Value::Int(n) | Value::Money(n) => Value::Rat(BigRational::from_integer(n)),
                v => v,
            },
            Term::Floor(a) => eval_unop(UnOp::Floor, &a.eval(model)?),
            Term::Round(a) => eval_unop(UnOp::Round, &a.eval(model)?),
            Term::Cmp(op, a, b) => {
                let (x, y) = (a.eval(model)?, b.eval(model)?);
                let x = money_as_int(x);
                let y = money_as_int(y);
                match op {
                    CmpOp::Eq => Value::Bool(values_equal(&x, &y)),
                    CmpOp::Ne => Value::Bool(!values_equal(&x, &y)),
                    _ => eval_binop(op.binop(), &x, &y),
                }
            }
            Term::Not(a) => eval_unop(UnOp::Not, &a.eval(model)?),
            Term::And(xs) => {
                let mut r = true;
                for x in xs {
                    r &= x.eval(model)?.as_bool()?;
                }
                Value::Bool(r)
            }
            Term::Or(xs) => {
                let mut r = false;
                for x in xs {
                    r |= x.eval(model)?.as_bool()?;
                }
                Value::Bool(r)
            }
            Term::InVariants(a, names) => match a.eval(model)? {
                Value::Enum { variant, .. } => Value::Bool(names.contains(&variant)),
                _ => return None,
            },
            c => c.const_value()?,
        }))
    }

    pub fn holds(&self, model: &BTreeMap<String, Value>) -> bool {
        self.eval(model) == Some(Value::Bool(true))
    }

    fn is_compound(&self) -> bool {
        !matches!(
            self,
            Term::Bool(_) | Term::Int(_) | Term::Var(..) | Term::EnumConst(..)
        ) && !matches!(self, Term::Real(q) if q.is_integer() && !q.is_negative())
    }
}

fn money_as_int(v: Value) -> Value {
    match v {
        Value::Money(n) => Value::Int(n),
        v => v,
    }
}

struct Child<'a>(&'a Term);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_compound()
            && !matches!(self.0, Term::ToReal(_) | Term::Floor(_) | Term::Round(_))
        {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bool(b) => write!(f, "{b}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Real(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Term::EnumConst(e, v) => write!(f, "{e}::{v}"),
            Term::Var(n, _) => f.write_str(n),
            Term::Add(a, b) => write!(f, "{} + {}", Child(a), Child(b)),
            Term::Sub(a, b) => write!(f, "{} - {}", Child(a), Child(b)),
            Term::Mul(a, b) => write!(f, "{} * {}", Child(a), Child(b)),
            Term::Div(a, b) => write!(f, "{} / {}", Child(a), Child(b)),
            Term::Neg(a) => write!(f, "-{}", Child(a)),
            Term::ToReal(a) => write!(f, "real({a})"),
            Term::Floor(a) => write!(f, "floor({a})"),
            Term::Round(a) => write!(f, "round({a})"),
            Term::Cmp(op, a, b) => write!(f, "{} {} {}", Child(a), op.symbol(), Child(b)),
            Term::Not(a) => write!(f, "not {}", Child(a)),
            Term::And(xs) | Term::Or(xs) => {
                let sep = if matches!(self, Term::And(_)) {
                    " and "
                } else {
                    " or "
                };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{}", Child(x))?;
                }
                Ok(())
            }
            Term::InVariants(a, names) => write!(f, "{} in {{{}}}", Child(a), names.join(", ")),
        }
    }
}

/// Symbolic shadow of a value. Scalars carry a term; enumerations carry a
/// tag term and the shadow of the payload; structures carry field shadows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sym {
    Term(Term),
    Enum {
        tag: Term,
        payload: Option<Box<Sym>>,
    },
    Struct(Vec<(String, Sym)>),
}

impl Sym {
    /// The constant shadow of a concrete value.
    pub fn of_value(v: &Value) -> Sym {
        match v {
            Value::Enum {
                ty,
                variant,
                payload,
            } => Sym::Enum {
                tag: Term::EnumConst(ty.clone(), variant.clone()),
                payload: payload.as_ref().map(|p| Box::new(Sym::of_value(p))),
            },
            Value::Struct { fields, .. } => Sym::Struct(
                fields
                    .iter()
                    .map(|(f, v)| (f.clone(), Sym::of_value(v)))
                    .collect(),
            ),
            v => Sym::Term(Term::from_value(v).unwrap_or(Term::Bool(false))),
        }
    }

    pub fn term(&self) -> Option<&Term> {
        match self {
            Sym::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Sym::Term(t) => t.has_vars(),
            Sym::Enum { tag, payload } => {
                tag.has_vars() || payload.as_ref().is_some_and(|p| p.has_vars())
            }
            Sym::Struct(fs) => fs.iter().any(|(_, s)| s.has_vars()),
        }
    }
}

/// Why a branch record exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Justification,
    IfCond,
    MatchArm,
    DivZeroCheck,
    OpaqueConcretized,
    Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchRecord {
    /// The condition as evaluated.
    pub cond: Term,
    pub taken: bool,
    /// The as-taken literal: `cond` or its negation.
    pub literal: Term,
    pub origin: Origin,
    pub span: Span,
    /// True when the constraint mentions no input.
    pub trivial: bool,
}

impl BranchRecord {
    pub fn new(cond: Term, taken: bool, origin: Origin, span: Span) -> BranchRecord {
        let literal = if taken {
            cond.clone()
        } else {
            Term::not(cond.clone())
        };
        let trivial = !cond.has_vars();
        BranchRecord {
            cond,
            taken,
            literal,
            origin,
            span,
            trivial,
        }
    }

    /// The literal describing the other side of this branch.
    pub fn flipped(&self) -> Term {
        if self.taken {
            Term::not(self.cond.clone())
        } else {
            self.cond.clone()
        }
    }
}

impl fmt::Display for BranchRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.cond, if self.taken { "T" } else { "F" })
    }
}

/// Hex SHA-256 of a path's literal sequence.
pub fn path_fingerprint(path: &[BranchRecord]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for r in path {
        h.update(r.literal.to_string().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
