//! Equivalence-preserving rewriting of terms: constant folding, double
//! negation, pushing negation into comparisons, and reflexive comparisons.

use crate::symbolic::{CmpOp, Term};

pub fn simplify(t: &Term) -> Term {
    match t {
        Term::Add(a, b) => Term::add(simplify(a), simplify(b)),
        Term::Sub(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b && !has_division(&a) {
                return match a.sort() {
                    crate::symbolic::Sort::Real => Term::Real(num::zero()),
                    _ => Term::int(0),
                };
            }
            Term::sub(a, b)
        }
        Term::Mul(a, b) => Term::mul(simplify(a), simplify(b)),
        Term::Div(a, b) => Term::div(simplify(a), simplify(b)),
        Term::Neg(a) => Term::neg(simplify(a)),
        Term::ToReal(a) => Term::to_real(simplify(a)),
        Term::Floor(a) => Term::floor(simplify(a)),
        Term::Round(a) => Term::round(simplify(a)),
        Term::Cmp(op, a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b && !has_division(&a) {
                return Term::Bool(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge));
            }
            Term::cmp(*op, a, b)
        }
        Term::Not(a) => match simplify(a) {
            Term::Cmp(op, x, y) => Term::Cmp(op.negate(), x, y),
            s => Term::not(s),
        },
        Term::And(xs) => {
            let mut items: Vec<Term> = Vec::new();
            for x in xs {
                let s = simplify(x);
                if !items.contains(&s) {
                    items.push(s);
                }
            }
            if items.iter().any(|x| items.contains(&Term::not(x.clone()))) {
                return Term::Bool(false);
            }
            Term::and(items)
        }
        Term::Or(xs) => {
            let mut items: Vec<Term> = Vec::new();
            for x in xs {
                let s = simplify(x);
                if !items.contains(&s) {
                    items.push(s);
                }
            }
            if items.iter().any(|x| items.contains(&Term::not(x.clone()))) {
                return Term::Bool(true);
            }
            Term::or(items)
        }
        Term::InVariants(a, names) => Term::in_variants(simplify(a), names.clone()),
        t => t.clone(),
    }
}

/// Reflexive rewrites are unsound when the term may divide by zero.
fn has_division(t: &Term) -> bool {
    matches!(t, Term::Div(..)) || t.children().iter().any(|c| has_division(c))
}
