//! Satisfiability of path constraints: a built-in procedure for linear
//! arithmetic with booleans, enumerations, `floor` and `round`, an
//! assertion stack with push/pop, the soft ladder of round input values, and
//! SMT-LIB output for external solvers.

pub mod builtin;
pub mod external;
pub mod linear;
pub mod simplify;
pub mod smtlib;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num::bigint::BigInt;
use num::Integer;

use crate::ast::Program;
use crate::concolic::input_atoms;
use crate::symbolic::{Sort, Term};
use crate::value::Value;

/// An assignment of solver variables. Integer-sorted variables (including
/// money in cents) map to `Value::Int`, reals to `Value::Rat`, enumeration
/// tags to payload-less `Value::Enum`.
pub type Model = BTreeMap<String, Value>;

/// Variables of a query in declaration order, and the variants of every
/// enumeration in scope.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decls {
    pub vars: Vec<(String, Sort)>,
    pub enums: BTreeMap<String, Vec<String>>,
}

impl Decls {
    pub fn for_scope(prog: &Program, scope: &str) -> Decls {
        let vars = prog
            .scope(scope)
            .map(|sd| {
                input_atoms(prog, sd)
                    .into_iter()
                    .map(|a| (a.name, a.sort))
                    .collect()
            })
            .unwrap_or_default();
        Decls {
            vars,
            enums: prog
                .enums
                .iter()
                .map(|e| (e.name.clone(), e.variant_names()))
                .collect(),
        }
    }

    pub fn var(&mut self, name: &str, sort: Sort) -> &mut Decls {
        self.vars.push((name.to_string(), sort));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl CheckResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, CheckResult::Sat(_))
    }
}

/// Rungs of the soft ladder: every money input a multiple of $100, of $10,
/// or of $1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SoftTier {
    T100,
    T10,
    T1,
}

impl SoftTier {
    pub const LADDER: [SoftTier; 3] = [SoftTier::T100, SoftTier::T10, SoftTier::T1];

    pub fn modulus_cents(self) -> i64 {
        match self {
            SoftTier::T100 => 10_000,
            SoftTier::T10 => 1_000,
            SoftTier::T1 => 100,
        }
    }

    pub fn higher(self) -> Option<SoftTier> {
        match self {
            SoftTier::T100 => None,
            SoftTier::T10 => Some(SoftTier::T100),
            SoftTier::T1 => Some(SoftTier::T10),
        }
    }

    /// Whether every listed money variable of `model` is on this rung.
    pub fn holds(self, model: &Model, money: &[String]) -> bool {
        let m = BigInt::from(self.modulus_cents());
        money.iter().all(|v| match model.get(v) {
            Some(Value::Int(c) | Value::Money(c)) => c.is_multiple_of(&m),
            _ => false,
        })
    }

    /// The highest rung an assignment satisfies.
    pub fn of_model(model: &Model, money: &[String]) -> Option<SoftTier> {
        SoftTier::LADDER.into_iter().find(|t| t.holds(model, money))
    }

    pub fn parse(s: &str) -> Option<SoftTier> {
        SoftTier::LADDER.into_iter().find(|t| t.to_string() == s)
    }
}

impl fmt::Display for SoftTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SoftTier::T100 => "T100",
            SoftTier::T10 => "T10",
            SoftTier::T1 => "T1",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Builtin,
    /// A shell command reading SMT-LIB on stdin.
    External(String),
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Backend, String> {
        if s == "builtin" {
            return Ok(Backend::Builtin);
        }
        match s.strip_prefix("smtlib:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(Backend::External(cmd.to_string())),
            _ => Err(format!(
                "unknown solver `{s}` (expected `builtin` or `smtlib:<command>`)"
            )),
        }
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("pop on an empty assertion stack")]
    EmptyStack,
}

/// An assertion stack. Each frame holds the literals pushed together.
#[derive(Debug)]
pub struct Session {
    backend: Backend,
    decls: Decls,
    prefs: Model,
    frames: Vec<Vec<Term>>,
    emit_dir: Option<PathBuf>,
    emitted: usize,
    calls: u64,
}

impl Session {
    pub fn new(backend: Backend, decls: Decls, prefs: Model) -> Session {
        Session {
            backend,
            decls,
            prefs,
            frames: Vec::new(),
            emit_dir: None,
            emitted: 0,
            calls: 0,
        }
    }

    /// Writes every query to `dir/q%06d.smt2`, numbered from `first`.
    pub fn emit_to(&mut self, dir: PathBuf, first: usize) {
        self.emit_dir = Some(dir);
        self.emitted = first;
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn decls(&self) -> &Decls {
        &self.decls
    }

    pub fn push(&mut self, lits: Vec<Term>) {
        self.frames.push(lits);
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        self.frames.pop().map(|_| ()).ok_or(SolverError::EmptyStack)
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn pop_to(&mut self, depth: usize) {
        self.frames.truncate(depth);
    }

    pub fn assertions(&self) -> Vec<Term> {
        self.frames.iter().flatten().cloned().collect()
    }

    pub fn check(&mut self) -> CheckResult {
        self.check_modulo(&BTreeMap::new())
    }

    /// Checks the stack with the named integer variables restricted to
    /// multiples of the given moduli.
    pub fn check_modulo(&mut self, modulus: &BTreeMap<String, BigInt>) -> CheckResult {
        self.calls += 1;
        let lits = self.assertions();
        if let Some(dir) = &self.emit_dir {
            let text = smtlib::emit(&self.decls, &lits, modulus);
            let path = dir.join(format!("q{:06}.smt2", self.emitted));
            self.emitted += 1;
            if let Err(e) = std::fs::write(&path, text) {
                log::warn!("cannot write {}: {e}", path.display());
            }
        }
        match &self.backend {
            Backend::Builtin => builtin::solve(&self.decls, &self.prefs, modulus, &lits),
            Backend::External(cmd) => {
                external::solve(cmd, &self.decls, &self.prefs, modulus, &lits)
            }
        }
    }

    /// Refines a model of the hard assertions with the soft ladder: the
    /// first rung that `hard` already satisfies or that is satisfiable on
    /// top of the stack wins. Falls back to `hard` with no rung.
    pub fn check_soft(&mut self, money: &[String], hard: Model) -> (Model, Option<SoftTier>) {
        if money.is_empty() {
            return (hard, None);
        }
        for tier in SoftTier::LADDER {
            if tier.holds(&hard, money) {
                return (hard, Some(tier));
            }
            let m: BTreeMap<String, BigInt> = money
                .iter()
                .map(|v| (v.clone(), BigInt::from(tier.modulus_cents())))
                .collect();
            if let CheckResult::Sat(model) = self.check_modulo(&m) {
                return (model, Some(tier));
            }
        }
        (hard, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::CmpOp;

    fn decls() -> Decls {
        let mut d = Decls::default();
        d.var("b", Sort::Bool).var("x", Sort::Int);
        d
    }

    fn x() -> Term {
        Term::var("x", Sort::Int)
    }

    fn b() -> Term {
        Term::var("b", Sort::Bool)
    }

    fn sat(r: CheckResult) -> Model {
        match r {
            CheckResult::Sat(m) => m,
            r => panic!("expected sat, got {r:?}"),
        }
    }

    #[test]
    fn running_example_query() {
        let mut s = Session::new(Backend::Builtin, decls(), Model::new());
        s.push(vec![b()]);
        s.push(vec![Term::cmp(CmpOp::Eq, x(), Term::int(0))]);
        let m = sat(s.check());
        assert_eq!(m["b"], Value::Bool(true));
        assert_eq!(m["x"], Value::int(0));
    }

    #[test]
    fn contradiction_is_unsat() {
        let mut s = Session::new(Backend::Builtin, decls(), Model::new());
        let gt = Term::cmp(CmpOp::Gt, x(), Term::int(0));
        s.push(vec![gt.clone(), Term::not(gt)]);
        assert_eq!(s.check(), CheckResult::Unsat);
    }

    #[test]
    fn money_threshold() {
        let mut d = Decls::default();
        d.var("income", Sort::Int);
        let mut s = Session::new(Backend::Builtin, d, Model::new());
        let income = Term::var("income", Sort::Int);
        s.push(vec![Term::not(Term::cmp(
            CmpOp::Le,
            income,
            Term::int(1_000_000),
        ))]);
        let m = sat(s.check());
        assert_eq!(m["income"], Value::int(1_000_001));
        let (r, tier) = s.check_soft(&["income".to_string()], m);
        assert_eq!(tier, Some(SoftTier::T100));
        assert_eq!(r["income"], Value::int(1_010_000));
    }

    #[test]
    fn soft_ladder_falls_back() {
        let mut d = Decls::default();
        d.var("m", Sort::Int);
        let m = Term::var("m", Sort::Int);
        let mut s = Session::new(Backend::Builtin, d.clone(), Model::new());
        s.push(vec![Term::cmp(CmpOp::Eq, m.clone(), Term::int(1_000_001))]);
        let hard = sat(s.check());
        let (r, tier) = s.check_soft(&["m".to_string()], hard);
        assert_eq!(tier, None);
        assert_eq!(r["m"], Value::int(1_000_001));
        let mut s = Session::new(Backend::Builtin, d, Model::new());
        s.push(vec![
            Term::cmp(CmpOp::Gt, m.clone(), Term::int(1_000_000)),
            Term::cmp(CmpOp::Lt, m, Term::int(1_000_500)),
        ]);
        let hard = sat(s.check());
        let (r, tier) = s.check_soft(&["m".to_string()], hard);
        assert_eq!(tier, Some(SoftTier::T1));
        assert_eq!(r["m"], Value::int(1_000_100));
    }

    #[test]
    fn stack_discipline() {
        let mut s = Session::new(Backend::Builtin, decls(), Model::new());
        s.push(vec![b()]);
        s.push(vec![Term::cmp(CmpOp::Eq, x(), Term::int(0))]);
        s.pop().unwrap();
        let mut fresh = Session::new(Backend::Builtin, decls(), Model::new());
        fresh.push(vec![b()]);
        assert_eq!(s.check(), fresh.check());
        s.pop().unwrap();
        assert_eq!(s.pop(), Err(SolverError::EmptyStack));
    }

    #[test]
    fn round_and_floor() {
        let mut d = Decls::default();
        d.var("c", Sort::Int);
        let c = Term::var("c", Sort::Int);
        let fifth = Term::real(num::rational::BigRational::new(1.into(), 5.into()));
        // round(c / 5) = 3 and c odd-ish constraints
        let r = Term::round(Term::mul(Term::to_real(c.clone()), fifth));
        let mut s = Session::new(Backend::Builtin, d.clone(), Model::new());
        s.push(vec![Term::cmp(CmpOp::Eq, r.clone(), Term::int(3))]);
        let m = sat(s.check());
        assert!(Term::cmp(CmpOp::Eq, r.clone(), Term::int(3)).holds(&m));
        assert_eq!(m["c"], Value::int(13));
        s.push(vec![Term::cmp(CmpOp::Gt, c.clone(), Term::int(17))]);
        assert_eq!(s.check(), CheckResult::Unsat);
        let fl = Term::floor(Term::div(Term::neg(c.clone()), Term::int(2)));
        let mut s = Session::new(Backend::Builtin, d, Model::new());
        s.push(vec![Term::cmp(CmpOp::Eq, fl.clone(), Term::int(-4))]);
        let m = sat(s.check());
        assert!(Term::cmp(CmpOp::Eq, fl, Term::int(-4)).holds(&m));
    }

    #[test]
    fn enumerations() {
        let mut d = Decls::default();
        d.var("c", Sort::Enum("C".into()));
        d.enums
            .insert("C".into(), vec!["R".into(), "G".into(), "B".into()]);
        let c = Term::var("c", Sort::Enum("C".into()));
        let mut s = Session::new(Backend::Builtin, d, Model::new());
        s.push(vec![
            Term::not(Term::in_variants(c.clone(), vec!["R".into()])),
            Term::not(Term::in_variants(c.clone(), vec!["G".into()])),
        ]);
        let m = sat(s.check());
        assert!(matches!(&m["c"], Value::Enum { variant, .. } if variant == "B"));
        s.push(vec![Term::cmp(
            CmpOp::Eq,
            c,
            Term::EnumConst("C".into(), "G".into()),
        )]);
        assert_eq!(s.check(), CheckResult::Unsat);
    }

    #[test]
    fn backend_parsing() {
        assert_eq!("builtin".parse::<Backend>(), Ok(Backend::Builtin));
        assert_eq!(
            "smtlib:z3 -in".parse::<Backend>(),
            Ok(Backend::External("z3 -in".into()))
        );
        assert!("z3".parse::<Backend>().is_err());
    }
}
