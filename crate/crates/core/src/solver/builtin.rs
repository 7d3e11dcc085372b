//! The built-in decision procedure. Literals are put in negation normal
//! form; disjunctions are split depth first; each branch is a conjunction of
//! boolean literals, enumeration membership tests and linear constraints,
//! decided by projection in [`super::linear`].
//!
//! `floor(t)` and `round(t)` become fresh integer variables bounded by the
//! linear form of `t`; `round` contributes one disjunction for the sign of
//! its argument.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::{One, Zero};

use super::linear::{Constraint, Lin, LinResult, Problem, Rel, Q};
use super::{CheckResult, Decls, Model};
use crate::symbolic::{CmpOp, Sort, Term};
use crate::value::Value;

/// Conjunctive branches explored before giving up.
pub const BRANCH_BUDGET: usize = 4096;

#[derive(Clone, Debug)]
enum Atom {
    Bool(String, bool),
    Enum(String, BTreeSet<String>),
    Lin(Constraint),
}

#[derive(Clone, Debug)]
enum F {
    Const(bool),
    Atom(Atom),
    And(Vec<F>),
    Or(Vec<F>),
}

struct Ctx<'a> {
    decls: &'a Decls,
    index: BTreeMap<String, usize>,
    problem: Problem,
    aux: BTreeMap<Term, usize>,
    side: Vec<F>,
}

fn half() -> Q {
    Q::new(BigInt::one(), BigInt::from(2))
}

impl Ctx<'_> {
    fn lin(&mut self, t: &Term) -> Result<Lin, String> {
        Ok(match t {
            Term::Int(n) => Lin::constant(Q::from_integer(n.clone())),
            Term::Real(q) => Lin::constant(q.clone()),
            Term::Var(n, Sort::Int | Sort::Real) => {
                let i = *self
                    .index
                    .get(n)
                    .ok_or_else(|| format!("undeclared variable `{n}`"))?;
                Lin::var(i)
            }
            Term::Add(a, b) => self.lin(a)?.add(&self.lin(b)?),
            Term::Sub(a, b) => self.lin(a)?.sub(&self.lin(b)?),
            Term::Neg(a) => self.lin(a)?.scale(&Q::from_integer(BigInt::from(-1))),
            Term::ToReal(a) => self.lin(a)?,
            Term::Mul(a, b) => {
                let (la, lb) = (self.lin(a)?, self.lin(b)?);
                if la.is_const() {
                    lb.scale(&la.constant)
                } else if lb.is_const() {
                    la.scale(&lb.constant)
                } else {
                    return Err(format!("nonlinear product `{t}`"));
                }
            }
            Term::Div(a, b) => {
                let (la, lb) = (self.lin(a)?, self.lin(b)?);
                if !lb.is_const() {
                    return Err(format!("nonlinear quotient `{t}`"));
                }
                if lb.constant.is_zero() {
                    return Err("division by constant zero".into());
                }
                la.scale(&(Q::one() / &lb.constant))
            }
            Term::Floor(a) | Term::Round(a) => {
                if let Some(k) = self.aux.get(t) {
                    return Ok(Lin::var(*k));
                }
                let q = self.lin(a)?;
                let k = self.problem.new_var(true, Q::zero(), None);
                self.aux.insert(t.clone(), k);
                let kv = Lin::var(k);
                let h = Lin::constant(half());
                if matches!(t, Term::Floor(_)) {
                    // k <= q < k + 1
                    self.side
                        .push(F::Atom(Atom::Lin(Constraint::new(kv.sub(&q), Rel::Le))));
                    let one = Lin::constant(Q::one());
                    self.side.push(F::Atom(Atom::Lin(Constraint::new(
                        q.sub(&kv).sub(&one),
                        Rel::Lt,
                    ))));
                } else {
                    // q >= 0: k - 1/2 <= q < k + 1/2; q < 0: k - 1/2 < q <= k + 1/2
                    let lower = kv.sub(&h).sub(&q);
                    let upper = q.sub(&kv).sub(&h);
                    let nonneg = F::And(vec![
                        F::Atom(Atom::Lin(Constraint::new(
                            q.scale(&Q::from_integer((-1).into())),
                            Rel::Le,
                        ))),
                        F::Atom(Atom::Lin(Constraint::new(lower.clone(), Rel::Le))),
                        F::Atom(Atom::Lin(Constraint::new(upper.clone(), Rel::Lt))),
                    ]);
                    let neg = F::And(vec![
                        F::Atom(Atom::Lin(Constraint::new(q.clone(), Rel::Lt))),
                        F::Atom(Atom::Lin(Constraint::new(lower, Rel::Lt))),
                        F::Atom(Atom::Lin(Constraint::new(upper, Rel::Le))),
                    ]);
                    self.side.push(F::Or(vec![nonneg, neg]));
                }
                Lin::var(k)
            }
            _ => return Err(format!("not an arithmetic term: `{t}`")),
        })
    }

    fn variants(&self, sort: &Sort) -> Result<Vec<String>, String> {
        match sort {
            Sort::Enum(e) => self
                .decls
                .enums
                .get(e)
                .cloned()
                .ok_or_else(|| format!("undeclared enumeration `{e}`")),
            s => Err(format!("expected an enumeration, found {s}")),
        }
    }

    fn enum_atom(&self, t: &Term, names: &[String], pos: bool) -> Result<F, String> {
        let Term::Var(n, sort) = t else {
            if let Term::EnumConst(_, v) = t {
                return Ok(F::Const(names.contains(v) == pos));
            }
            return Err(format!("unsupported enumeration term `{t}`"));
        };
        let all = self.variants(sort)?;
        let set: BTreeSet<String> = all
            .into_iter()
            .filter(|v| names.contains(v) == pos)
            .collect();
        Ok(F::Atom(Atom::Enum(n.clone(), set)))
    }

    fn formula(&mut self, t: &Term, pos: bool) -> Result<F, String> {
        Ok(match t {
            Term::Bool(b) => F::Const(*b == pos),
            Term::Var(n, Sort::Bool) => F::Atom(Atom::Bool(n.clone(), pos)),
            Term::Not(a) => self.formula(a, !pos)?,
            Term::And(xs) | Term::Or(xs) => {
                let items = xs
                    .iter()
                    .map(|x| self.formula(x, pos))
                    .collect::<Result<Vec<_>, _>>()?;
                if matches!(t, Term::And(_)) == pos {
                    F::And(items)
                } else {
                    F::Or(items)
                }
            }
            Term::InVariants(a, names) => self.enum_atom(a, names, pos)?,
            Term::Cmp(op, a, b) => {
                let op = if pos { *op } else { op.negate() };
                match a.sort() {
                    Sort::Bool => {
                        let eq = match op {
                            CmpOp::Eq => true,
                            CmpOp::Ne => false,
                            _ => return Err(format!("ordered comparison of booleans `{t}`")),
                        };
                        let both = F::And(vec![self.formula(a, true)?, self.formula(b, eq)?]);
                        let neither = F::And(vec![self.formula(a, false)?, self.formula(b, !eq)?]);
                        F::Or(vec![both, neither])
                    }
                    Sort::Enum(_) => {
                        let eq = match op {
                            CmpOp::Eq => true,
                            CmpOp::Ne => false,
                            _ => return Err(format!("ordered comparison of enumerations `{t}`")),
                        };
                        match (a.as_ref(), b.as_ref()) {
                            (x, Term::EnumConst(_, v)) | (Term::EnumConst(_, v), x) => {
                                self.enum_atom(x, std::slice::from_ref(v), eq)?
                            }
                            (x, y) => {
                                let vs = self.variants(&x.sort())?;
                                let mut alts = Vec::new();
                                for v in &vs {
                                    let one = std::slice::from_ref(v);
                                    alts.push(F::And(vec![
                                        self.enum_atom(x, one, true)?,
                                        self.enum_atom(y, one, eq)?,
                                    ]));
                                }
                                F::Or(alts)
                            }
                        }
                    }
                    _ => {
                        let (la, lb) = (self.lin(a)?, self.lin(b)?);
                        let (lin, rel) = match op {
                            CmpOp::Eq => (la.sub(&lb), Rel::Eq),
                            CmpOp::Ne => (la.sub(&lb), Rel::Ne),
                            CmpOp::Lt => (la.sub(&lb), Rel::Lt),
                            CmpOp::Le => (la.sub(&lb), Rel::Le),
                            CmpOp::Gt => (lb.sub(&la), Rel::Lt),
                            CmpOp::Ge => (lb.sub(&la), Rel::Le),
                        };
                        F::Atom(Atom::Lin(Constraint::new(lin, rel)))
                    }
                }
            }
            _ => return Err(format!("not a boolean term: `{t}`")),
        })
    }
}

#[derive(Clone, Default)]
struct Conj {
    bools: BTreeMap<String, bool>,
    enums: BTreeMap<String, BTreeSet<String>>,
    lins: Vec<Constraint>,
}

impl Conj {
    fn add(&mut self, a: &Atom) -> bool {
        match a {
            Atom::Bool(n, v) => *self.bools.entry(n.clone()).or_insert(*v) == *v,
            Atom::Enum(n, set) => {
                let cur = self.enums.entry(n.clone()).or_insert_with(|| set.clone());
                *cur = cur.intersection(set).cloned().collect();
                !cur.is_empty()
            }
            Atom::Lin(c) => {
                self.lins.push(c.clone());
                true
            }
        }
    }
}

struct Search<'a> {
    decls: &'a Decls,
    prefs: &'a Model,
    problem: &'a Problem,
    index: &'a BTreeMap<String, usize>,
    leaves: usize,
    unknown: Option<String>,
}

impl Search<'_> {
    fn run(&mut self, mut agenda: Vec<F>, mut conj: Conj) -> Option<Model> {
        while let Some(f) = agenda.pop() {
            match f {
                F::Const(true) => {}
                F::Const(false) => return None,
                F::Atom(a) => {
                    if !conj.add(&a) {
                        return None;
                    }
                }
                F::And(xs) => agenda.extend(xs.into_iter().rev()),
                F::Or(xs) => {
                    for x in xs {
                        if self.leaves >= BRANCH_BUDGET {
                            self.unknown = Some("case-split budget exhausted".into());
                            return None;
                        }
                        let mut branch = agenda.clone();
                        branch.push(x);
                        if let Some(m) = self.run(branch, conj.clone()) {
                            return Some(m);
                        }
                    }
                    return None;
                }
            }
        }
        self.leaves += 1;
        self.leaf(conj)
    }

    fn leaf(&mut self, conj: Conj) -> Option<Model> {
        let mut p = self.problem.clone();
        p.cons = conj.lins;
        let vals = match p.solve() {
            LinResult::Sat(v) => v,
            LinResult::Unsat => return None,
            LinResult::Unknown(why) => {
                self.unknown = Some(why);
                return None;
            }
        };
        let mut model = Model::new();
        for (name, sort) in &self.decls.vars {
            let v = match sort {
                Sort::Bool => Value::Bool(match conj.bools.get(name) {
                    Some(b) => *b,
                    None => self
                        .prefs
                        .get(name)
                        .and_then(Value::as_bool)
                        .unwrap_or(false),
                }),
                Sort::Enum(e) => {
                    let order = self.decls.enums.get(e).cloned().unwrap_or_default();
                    let allowed = |v: &String| conj.enums.get(name).is_none_or(|s| s.contains(v));
                    let preferred = match self.prefs.get(name) {
                        Some(Value::Enum { variant, .. }) if allowed(variant) => {
                            Some(variant.clone())
                        }
                        _ => None,
                    };
                    let variant =
                        preferred.or_else(|| order.iter().find(|v| allowed(v)).cloned())?;
                    Value::Enum {
                        ty: e.clone(),
                        variant,
                        payload: None,
                    }
                }
                Sort::Int => Value::Int(vals[self.index[name]].to_integer()),
                Sort::Real => Value::Rat(vals[self.index[name]].clone()),
            };
            model.insert(name.clone(), v);
        }
        Some(model)
    }
}

/// Decides the conjunction of `lits`. `prefs` holds preferred values;
/// `modulus` requires the named integer variables to be multiples.
pub fn solve(
    decls: &Decls,
    prefs: &Model,
    modulus: &BTreeMap<String, BigInt>,
    lits: &[Term],
) -> CheckResult {
    let mut ctx = Ctx {
        decls,
        index: BTreeMap::new(),
        problem: Problem::default(),
        aux: BTreeMap::new(),
        side: Vec::new(),
    };
    for (name, sort) in &decls.vars {
        if matches!(sort, Sort::Int | Sort::Real) {
            let pref = match prefs.get(name) {
                Some(Value::Int(n) | Value::Money(n)) => Q::from_integer(n.clone()),
                Some(Value::Rat(q)) => q.clone(),
                _ => Q::zero(),
            };
            let m = modulus.get(name).cloned();
            let i = ctx.problem.new_var(*sort == Sort::Int, pref, m);
            ctx.index.insert(name.clone(), i);
        }
    }
    let mut agenda = Vec::new();
    for l in lits {
        match ctx.formula(&super::simplify::simplify(l), true) {
            Ok(f) => agenda.push(f),
            Err(why) => return CheckResult::Unknown(why),
        }
    }
    agenda.append(&mut ctx.side);
    agenda.reverse();
    let mut search = Search {
        decls,
        prefs,
        problem: &ctx.problem,
        index: &ctx.index,
        leaves: 0,
        unknown: None,
    };
    let found = search.run(agenda, Conj::default());
    match (found, search.unknown) {
        (Some(m), _) => {
            if let Some(bad) = lits.iter().find(|l| !l.holds(&m)) {
                log::error!("builtin model violates `{bad}`");
                return CheckResult::Unknown(format!("model check failed on `{bad}`"));
            }
            CheckResult::Sat(m)
        }
        (None, Some(why)) => CheckResult::Unknown(why),
        (None, None) => CheckResult::Unsat,
    }
}
