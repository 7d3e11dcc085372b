//! SMT-LIB v2 text for queries, and parsing of `(get-model)` responses.

use std::collections::BTreeMap;
use std::fmt::Write;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use super::{Decls, Model};
use crate::symbolic::{CmpOp, Sort, Term};
use crate::value::Value;

const ROUND_DEF: &str = "(define-fun round ((q Real)) Int (ite (>= q 0.0) (to_int (+ q 0.5)) (- (to_int (+ (- q) 0.5)))))";

fn is_simple(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(
            s,
            "round" | "true" | "false" | "not" | "and" | "or" | "ite" | "let" | "mod" | "div"
        )
}

/// A symbol, quoted when needed.
pub fn symbol(s: &str) -> String {
    if is_simple(s) {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

fn constructor(e: &str, v: &str) -> String {
    format!("|{e}.{v}|")
}

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Bool => "Bool".into(),
        Sort::Int => "Int".into(),
        Sort::Real => "Real".into(),
        Sort::Enum(e) => symbol(e),
    }
}

fn int_lit(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn real_lit(q: &BigRational) -> String {
    let body = if q.denom().is_one() {
        format!("{}.0", q.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", q.numer().abs(), q.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

pub fn term(t: &Term) -> String {
    let bin = |op: &str, a: &Term, b: &Term| format!("({op} {} {})", term(a), term(b));
    match t {
        Term::Bool(b) => b.to_string(),
        Term::Int(n) => int_lit(n),
        Term::Real(q) => real_lit(q),
        Term::EnumConst(e, v) => constructor(e, v),
        Term::Var(n, _) => symbol(n),
        Term::Add(a, b) => bin("+", a, b),
        Term::Sub(a, b) => bin("-", a, b),
        Term::Mul(a, b) => bin("*", a, b),
        Term::Div(a, b) => bin("/", a, b),
        Term::Neg(a) => format!("(- {})", term(a)),
        Term::ToReal(a) => format!("(to_real {})", term(a)),
        Term::Floor(a) => format!("(to_int {})", term(a)),
        Term::Round(a) => format!("(round {})", term(a)),
        Term::Cmp(op, a, b) => match op {
            CmpOp::Eq => bin("=", a, b),
            CmpOp::Ne => format!("(not {})", bin("=", a, b)),
            CmpOp::Lt => bin("<", a, b),
            CmpOp::Le => bin("<=", a, b),
            CmpOp::Gt => bin(">", a, b),
            CmpOp::Ge => bin(">=", a, b),
        },
        Term::Not(a) => format!("(not {})", term(a)),
        Term::And(xs) | Term::Or(xs) => {
            let op = if matches!(t, Term::And(_)) {
                "and"
            } else {
                "or"
            };
            let mut s = format!("({op}");
            for x in xs {
                s.push(' ');
                s.push_str(&term(x));
            }
            s.push(')');
            s
        }
        Term::InVariants(a, names) => {
            let Sort::Enum(e) = a.sort() else {
                return "false".into();
            };
            let eqs: Vec<String> = names
                .iter()
                .map(|v| format!("(= {} {})", term(a), constructor(&e, v)))
                .collect();
            match eqs.len() {
                0 => "false".into(),
                1 => eqs.into_iter().next().expect("one"),
                _ => format!("(or {})", eqs.join(" ")),
            }
        }
    }
}

/// The full query: declarations, the `round` definition when used, one
/// assertion per literal and per modulus requirement, then
/// `(check-sat)(get-model)`.
pub fn emit(decls: &Decls, lits: &[Term], modulus: &BTreeMap<String, BigInt>) -> String {
    let mut out = String::from("(set-logic ALL)\n");
    for (e, vs) in &decls.enums {
        let cons: Vec<String> = vs
            .iter()
            .map(|v| format!("({})", constructor(e, v)))
            .collect();
        let _ = writeln!(
            out,
            "(declare-datatypes (({} 0)) (({})))",
            symbol(e),
            cons.join(" ")
        );
    }
    for (n, s) in &decls.vars {
        let _ = writeln!(out, "(declare-const {} {})", symbol(n), sort_name(s));
    }
    if lits.iter().any(uses_round) {
        out.push_str(ROUND_DEF);
        out.push('\n');
    }
    for l in lits {
        let _ = writeln!(out, "(assert {})", term(l));
    }
    for (n, m) in modulus {
        let _ = writeln!(out, "(assert (= (mod {} {m}) 0))", symbol(n));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

fn uses_round(t: &Term) -> bool {
    matches!(t, Term::Round(_)) || t.children().into_iter().any(uses_round)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

/// Parses a sequence of S-expressions. `|...|` symbols are unquoted.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced `)`")?
                    .push(Sexp::List(done));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '|' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(c) => s.push(c),
                        None => return Err("unterminated `|` symbol".into()),
                    }
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err("unterminated string".into()),
                    }
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().expect("root"))
}

fn number(s: &Sexp) -> Result<BigRational, String> {
    match s {
        Sexp::Atom(a) => {
            if let Some((i, f)) = a.split_once('.') {
                let digits = format!("{i}{f}");
                let n: BigInt = digits.parse().map_err(|_| format!("bad number `{a}`"))?;
                let d = num::pow(BigInt::from(10), f.len());
                Ok(BigRational::new(n, d))
            } else {
                let n: BigInt = a.parse().map_err(|_| format!("bad number `{a}`"))?;
                Ok(BigRational::from_integer(n))
            }
        }
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-number(x)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = number(y)?;
                if d.is_zero() {
                    return Err("division by zero in model".into());
                }
                Ok(number(x)? / d)
            }
            [Sexp::Atom(op), x] if op == "to_real" => number(x),
            _ => Err(format!("unsupported model value {s:?}")),
        },
    }
}

fn value_of(s: &Sexp, sort: &Sort) -> Result<Value, String> {
    match sort {
        Sort::Bool => match s {
            Sexp::Atom(a) if a == "true" => Ok(Value::Bool(true)),
            Sexp::Atom(a) if a == "false" => Ok(Value::Bool(false)),
            _ => Err(format!("bad boolean {s:?}")),
        },
        Sort::Int => {
            let q = number(s)?;
            if !q.is_integer() {
                return Err("non-integral value for an Int".into());
            }
            Ok(Value::Int(q.to_integer()))
        }
        Sort::Real => Ok(Value::Rat(number(s)?)),
        Sort::Enum(e) => match s {
            Sexp::Atom(a) => {
                let v = a
                    .strip_prefix(&format!("{e}."))
                    .ok_or_else(|| format!("bad constructor `{a}` for {e}"))?;
                Ok(Value::Enum {
                    ty: e.clone(),
                    variant: v.to_string(),
                    payload: None,
                })
            }
            _ => Err(format!("bad enumeration value {s:?}")),
        },
    }
}

/// Reads `define-fun` entries of a `(get-model)` response for the declared
/// variables. Unknown names are ignored.
pub fn parse_model(text: &str, decls: &Decls) -> Result<Model, String> {
    let sorts: BTreeMap<&str, &Sort> = decls.vars.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let mut model = Model::new();
    let mut todo = parse_sexps(text)?;
    while let Some(s) = todo.pop() {
        let Sexp::List(items) = s else { continue };
        match items.as_slice() {
            [Sexp::Atom(k), Sexp::Atom(name), Sexp::List(params), _sort, value]
                if k == "define-fun" && params.is_empty() =>
            {
                if let Some(sort) = sorts.get(name.as_str()) {
                    model.insert(name.clone(), value_of(value, sort)?);
                }
            }
            _ => todo.extend(items),
        }
    }
    Ok(model)
}
