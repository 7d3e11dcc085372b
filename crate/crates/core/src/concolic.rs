//! Instrumented evaluation: every value carries a symbolic shadow over the
//! scope inputs, and every branch taken appends a record to the path.
//!
//! The path is kept in chronological order. Constraints gathered while
//! evaluating the exceptions of a default term stay in place when the term
//! completes normally; with the early-error rule, a conflicting exception
//! discards the constraints of the exceptions evaluated before it.

use std::collections::BTreeMap;

use num::rational::BigRational;

use crate::ast::*;
use crate::interp::{
    bind_inputs, collect_outputs, default_value, ConflictReason, ConflictSite, Env, Mode, Outcome,
    RunError,
};
use crate::opaque::OpaqueRegistry;
use crate::ops::{eval_binop, eval_unop, is_zero_value};
use crate::symbolic::{sort_of, BranchRecord, CmpOp, Origin, Sort, Sym, Term};
use crate::value::{SemType, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConcolicOpts {
    pub mode: Mode,
    pub early_error: bool,
}

/// A scalar input component the solver assigns: a top-level input, a
/// structure field (`p.k`), an enumeration tag, or the payload of one
/// variant (`e#V`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub ty: SemType,
    pub sort: Sort,
}

/// The atoms of a scope's inputs, in declaration order.
pub fn input_atoms(prog: &Program, scope: &Scope) -> Vec<Atom> {
    let mut out = Vec::new();
    for (n, t) in &scope.inputs {
        atoms_of(prog, n, t, &mut out);
    }
    out
}

fn atoms_of(prog: &Program, path: &str, ty: &SemType, out: &mut Vec<Atom>) {
    match ty {
        SemType::Struct(n) => {
            if let Some(d) = prog.struct_decl(n) {
                for (f, ft) in &d.fields {
                    atoms_of(prog, &format!("{path}.{f}"), ft, out);
                }
            }
        }
        SemType::Enum(n) => {
            out.push(Atom {
                name: path.to_string(),
                ty: ty.clone(),
                sort: Sort::Enum(n.clone()),
            });
            if let Some(d) = prog.enum_decl(n) {
                for v in &d.variants {
                    if let Some(pt) = &v.payload {
                        atoms_of(prog, &format!("{path}#{}", v.name), pt, out);
                    }
                }
            }
        }
        t => {
            if let Some(sort) = sort_of(t) {
                out.push(Atom {
                    name: path.to_string(),
                    ty: t.clone(),
                    sort,
                });
            }
        }
    }
}

/// Atom values of concrete inputs. Payloads of inactive variants take their
/// default value, so the assignment is total over `input_atoms`.
pub fn flatten_inputs(prog: &Program, scope: &Scope, inputs: &Env) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    for (n, t) in &scope.inputs {
        let v = inputs
            .get(n)
            .cloned()
            .unwrap_or_else(|| default_value(prog, t));
        flatten_value(prog, n, t, &v, &mut out);
    }
    out
}

fn flatten_value(
    prog: &Program,
    path: &str,
    ty: &SemType,
    v: &Value,
    out: &mut BTreeMap<String, Value>,
) {
    match (ty, v) {
        (SemType::Struct(_), Value::Struct { fields, .. }) => {
            let SemType::Struct(n) = ty else {
                unreachable!()
            };
            let Some(d) = prog.struct_decl(n) else { return };
            for (f, ft) in &d.fields {
                if let Some((_, fv)) = fields.iter().find(|(k, _)| k == f) {
                    flatten_value(prog, &format!("{path}.{f}"), ft, fv, out);
                }
            }
        }
        (
            SemType::Enum(n),
            Value::Enum {
                variant, payload, ..
            },
        ) => {
            out.insert(
                path.to_string(),
                Value::Enum {
                    ty: n.clone(),
                    variant: variant.clone(),
                    payload: None,
                },
            );
            let Some(d) = prog.enum_decl(n) else { return };
            for var in &d.variants {
                let Some(pt) = &var.payload else { continue };
                let pv = match payload {
                    Some(p) if &var.name == variant => (**p).clone(),
                    _ => default_value(prog, pt),
                };
                flatten_value(prog, &format!("{path}#{}", var.name), pt, &pv, out);
            }
        }
        (SemType::Money, Value::Money(c)) => {
            out.insert(path.to_string(), Value::Int(c.clone()));
        }
        (_, v) => {
            out.insert(path.to_string(), v.clone());
        }
    }
}

/// Rebuilds typed scope inputs from an atom assignment. Missing atoms take
/// their default value.
pub fn rebuild_inputs(prog: &Program, scope: &Scope, model: &BTreeMap<String, Value>) -> Env {
    scope
        .inputs
        .iter()
        .map(|(n, t)| (n.clone(), rebuild_value(prog, n, t, model)))
        .collect()
}

fn rebuild_value(
    prog: &Program,
    path: &str,
    ty: &SemType,
    model: &BTreeMap<String, Value>,
) -> Value {
    match ty {
        SemType::Struct(n) => {
            let d = prog.struct_decl(n).expect("validated struct");
            Value::Struct {
                ty: n.clone(),
                fields: d
                    .fields
                    .iter()
                    .map(|(f, ft)| {
                        (
                            f.clone(),
                            rebuild_value(prog, &format!("{path}.{f}"), ft, model),
                        )
                    })
                    .collect(),
            }
        }
        SemType::Enum(n) => {
            let d = prog.enum_decl(n).expect("validated enum");
            let variant = match model.get(path) {
                Some(Value::Enum { variant, .. }) if d.variant(variant).is_some() => {
                    variant.clone()
                }
                _ => d.variants[0].name.clone(),
            };
            let payload = d
                .variant(&variant)
                .and_then(|v| v.payload.as_ref())
                .map(|pt| Box::new(rebuild_value(prog, &format!("{path}#{variant}"), pt, model)));
            Value::Enum {
                ty: n.clone(),
                variant,
                payload,
            }
        }
        t => {
            let v = model.get(path).cloned();
            match (t, v) {
                (SemType::Money, Some(Value::Int(c) | Value::Money(c))) => Value::Money(c),
                (SemType::Rat, Some(Value::Int(n))) => Value::Rat(BigRational::from_integer(n)),
                (_, Some(v)) if crate::interp::value_has_type(prog, &v, t) => v,
                _ => default_value(prog, t),
            }
        }
    }
}

fn input_sym(prog: &Program, path: &str, ty: &SemType, v: &Value) -> Sym {
    match (ty, v) {
        (SemType::Struct(_), Value::Struct { fields, .. }) => Sym::Struct(
            fields
                .iter()
                .map(|(f, fv)| {
                    let ft = field_type(prog, ty, f);
                    (f.clone(), input_sym(prog, &format!("{path}.{f}"), &ft, fv))
                })
                .collect(),
        ),
        (
            SemType::Enum(n),
            Value::Enum {
                variant, payload, ..
            },
        ) => {
            let pt = prog
                .enum_decl(n)
                .and_then(|d| d.variant(variant))
                .and_then(|v| v.payload.clone());
            Sym::Enum {
                tag: Term::Var(path.to_string(), Sort::Enum(n.clone())),
                payload: match (payload, pt) {
                    (Some(p), Some(pt)) => Some(Box::new(input_sym(
                        prog,
                        &format!("{path}#{variant}"),
                        &pt,
                        p,
                    ))),
                    _ => None,
                },
            }
        }
        (t, _) => match sort_of(t) {
            Some(sort) => Sym::Term(Term::Var(path.to_string(), sort)),
            None => Sym::of_value(v),
        },
    }
}

fn field_type(prog: &Program, ty: &SemType, f: &str) -> SemType {
    let SemType::Struct(n) = ty else {
        unreachable!()
    };
    prog.struct_decl(n)
        .and_then(|d| d.fields.iter().find(|(k, _)| k == f))
        .map(|(_, t)| t.clone())
        .expect("validated field")
}

/// A value together with its symbolic shadow.
#[derive(Clone, Debug)]
pub struct CValue {
    pub v: Value,
    pub s: Sym,
}

impl CValue {
    fn concrete(v: Value) -> CValue {
        let s = Sym::of_value(&v);
        CValue { v, s }
    }

    fn is_abnormal(&self) -> bool {
        self.v.is_abnormal()
    }

    fn term(&self) -> Term {
        match &self.s {
            Sym::Term(t) => t.clone(),
            Sym::Enum { tag, .. } => tag.clone(),
            Sym::Struct(_) => Term::from_value(&self.v).unwrap_or(Term::Bool(false)),
        }
    }
}

/// Result of one instrumented scope run.
#[derive(Clone, Debug)]
pub struct ConcolicRun {
    pub outcome: Result<Outcome, RunError>,
    pub path: Vec<BranchRecord>,
}

pub struct Concolic<'p> {
    prog: &'p Program,
    opaque: &'p OpaqueRegistry,
    opts: ConcolicOpts,
    site: Option<ConflictSite>,
    pub path: Vec<BranchRecord>,
}

macro_rules! strict {
    ($e:expr) => {{
        let v = $e;
        if v.is_abnormal() {
            return v;
        }
        v
    }};
}

type Locals = Vec<(String, CValue)>;

impl<'p> Concolic<'p> {
    pub fn new(prog: &'p Program, opaque: &'p OpaqueRegistry, opts: ConcolicOpts) -> Concolic<'p> {
        Concolic {
            prog,
            opaque,
            opts,
            site: None,
            path: Vec::new(),
        }
    }

    fn conflict(&mut self, spans: Vec<Span>, reason: ConflictReason) -> CValue {
        if self.site.is_none() {
            self.site = Some(ConflictSite { spans, reason });
        }
        CValue::concrete(Value::Conflict)
    }

    fn record(&mut self, cond: Term, taken: bool, origin: Origin, span: Span) {
        self.path.push(BranchRecord::new(cond, taken, origin, span));
    }

    pub fn eval(&mut self, e: &Expr, locals: &mut Locals) -> CValue {
        match &e.kind {
            ExprKind::Var(x) => match locals.iter().rev().find(|(n, _)| n == x) {
                Some((_, v)) => v.clone(),
                None => self.conflict(vec![e.span], ConflictReason::Internal),
            },
            ExprKind::Lit(Value::Conflict) => self.conflict(vec![e.span], ConflictReason::Literal),
            ExprKind::Lit(v) => CValue::concrete(v.clone()),
            ExprKind::Binary(op, l, r) => {
                let lv = strict!(self.eval(l, locals));
                let rv = strict!(self.eval(r, locals));
                self.binary(*op, lv, rv, e.span)
            }
            ExprKind::Unary(op, x) => {
                let xv = strict!(self.eval(x, locals));
                let v = eval_unop(*op, &xv.v);
                let t = xv.term();
                let s = match op {
                    UnOp::Not => Term::not(t),
                    UnOp::Neg => Term::neg(t),
                    UnOp::Round => Term::round(t),
                    UnOp::Floor => Term::floor(t),
                };
                CValue { v, s: Sym::Term(s) }
            }
            ExprKind::If(c, t, f) => {
                let cv = strict!(self.eval(c, locals));
                let taken = cv.v == Value::Bool(true);
                self.record(cv.term(), taken, Origin::IfCond, c.span);
                if taken {
                    self.eval(t, locals)
                } else {
                    self.eval(f, locals)
                }
            }
            ExprKind::Match(s, arms) => {
                let sv = strict!(self.eval(s, locals));
                let Value::Enum {
                    variant, payload, ..
                } = &sv.v
                else {
                    return self.conflict(vec![e.span], ConflictReason::Internal);
                };
                let (tag, psym) = match &sv.s {
                    Sym::Enum { tag, payload } => (tag.clone(), payload.clone()),
                    _ => (sv.term(), None),
                };
                for (i, arm) in arms.iter().enumerate() {
                    let hit = match &arm.pattern {
                        Pattern::Wildcard => true,
                        Pattern::Variants { names, .. } => {
                            let hit = names.contains(variant);
                            if !hit || i + 1 < arms.len() {
                                let cond = Term::in_variants(tag.clone(), names.clone());
                                self.record(cond, hit, Origin::MatchArm, arm.body.span);
                            }
                            hit
                        }
                    };
                    if hit {
                        return match (arm.pattern.binder(), payload) {
                            (Some(b), Some(p)) => {
                                let s = psym.map(|s| *s).unwrap_or_else(|| Sym::of_value(p));
                                locals.push((
                                    b.to_string(),
                                    CValue {
                                        v: (**p).clone(),
                                        s,
                                    },
                                ));
                                let v = self.eval(&arm.body, locals);
                                locals.pop();
                                v
                            }
                            _ => self.eval(&arm.body, locals),
                        };
                    }
                }
                self.conflict(vec![e.span], ConflictReason::Internal)
            }
            ExprKind::StructMake(name, fields) => {
                let mut vals = Vec::new();
                for (f, fe) in fields {
                    let v = strict!(self.eval(fe, locals));
                    vals.push((f.clone(), v));
                }
                let order: Vec<String> = self
                    .prog
                    .struct_decl(name)
                    .map(|d| d.fields.iter().map(|(f, _)| f.clone()).collect())
                    .unwrap_or_default();
                vals.sort_by_key(|(f, _)| order.iter().position(|o| o == f));
                CValue {
                    v: Value::Struct {
                        ty: name.clone(),
                        fields: vals.iter().map(|(f, c)| (f.clone(), c.v.clone())).collect(),
                    },
                    s: Sym::Struct(vals.into_iter().map(|(f, c)| (f, c.s)).collect()),
                }
            }
            ExprKind::FieldGet(x, f) => {
                let xv = strict!(self.eval(x, locals));
                let v = match &xv.v {
                    Value::Struct { fields, .. } => {
                        fields.iter().find(|(n, _)| n == f).map(|(_, v)| v.clone())
                    }
                    _ => None,
                };
                let Some(v) = v else {
                    return self.conflict(vec![e.span], ConflictReason::Internal);
                };
                let s = match xv.s {
                    Sym::Struct(fs) => fs.into_iter().find(|(n, _)| n == f).map(|(_, s)| s),
                    _ => None,
                };
                let s = s.unwrap_or_else(|| Sym::of_value(&v));
                CValue { v, s }
            }
            ExprKind::EnumMake(ty, variant, p) => {
                let payload = match p {
                    Some(p) => Some(strict!(self.eval(p, locals))),
                    None => None,
                };
                CValue {
                    v: Value::Enum {
                        ty: ty.clone(),
                        variant: variant.clone(),
                        payload: payload.as_ref().map(|c| Box::new(c.v.clone())),
                    },
                    s: Sym::Enum {
                        tag: Term::EnumConst(ty.clone(), variant.clone()),
                        payload: payload.map(|c| Box::new(c.s)),
                    },
                }
            }
            ExprKind::Let(x, b, body) => {
                let bv = strict!(self.eval(b, locals));
                locals.push((x.clone(), bv));
                let v = self.eval(body, locals);
                locals.pop();
                v
            }
            ExprKind::Call(f, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(strict!(self.eval(a, locals)));
                }
                self.call(f, vals, e.span)
            }
            ExprKind::Default {
                exceptions,
                just,
                cons,
            } => self.default(exceptions, just, cons, locals),
            ExprKind::Assert(c, body) => {
                let cv = strict!(self.eval(c, locals));
                let ok = cv.v == Value::Bool(true);
                self.record(cv.term(), ok, Origin::IfCond, c.span);
                if !ok {
                    return self.conflict(vec![c.span], ConflictReason::AssertionFailed);
                }
                self.eval(body, locals)
            }
            ExprKind::Opaque(tag, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(strict!(self.eval(a, locals)).v);
                }
                self.record(Term::Bool(true), true, Origin::OpaqueConcretized, e.span);
                match self.opaque.get(tag).and_then(|h| h.eval(&vals)) {
                    Some(v) => CValue::concrete(v),
                    None => self.conflict(vec![e.span], ConflictReason::OpaqueFailure),
                }
            }
        }
    }

    fn binary(&mut self, op: BinOp, lv: CValue, rv: CValue, span: Span) -> CValue {
        if op == BinOp::Div {
            let zero = is_zero_value(&rv.v);
            let rt = rv.term();
            let z = if rt.sort() == Sort::Real {
                Term::Real(BigRational::from_integer(0.into()))
            } else {
                Term::int(0)
            };
            self.record(
                Term::cmp(CmpOp::Eq, rt, z),
                zero,
                Origin::DivZeroCheck,
                span,
            );
            if zero {
                return self.conflict(vec![span], ConflictReason::DivisionByZero);
            }
        }
        let v = eval_binop(op, &lv.v, &rv.v);
        if v == Value::Conflict {
            return self.conflict(vec![span], ConflictReason::Internal);
        }
        if op.is_comparison()
            && matches!(op, BinOp::Eq | BinOp::Ne)
            && !matches!(lv.s, Sym::Term(_))
        {
            let eq = sym_eq(&lv.s, &rv.s);
            let t = if op == BinOp::Eq { eq } else { Term::not(eq) };
            return CValue { v, s: Sym::Term(t) };
        }
        let lt = lv.term();
        let mut rt = rv.term();
        // Products and quotients of two symbolic operands leave the linear
        // fragment: the right operand is replaced by its concrete value.
        if matches!(op, BinOp::Mul | BinOp::Div) && lt.has_vars() && rt.has_vars() {
            rt = Term::from_value(&rv.v).expect("scalar");
        }
        let rounds = matches!(v, Value::Money(_))
            && matches!(op, BinOp::Mul | BinOp::Div)
            && (matches!(lv.v, Value::Rat(_)) || matches!(rv.v, Value::Rat(_)) || op == BinOp::Div);
        let t = if rounds {
            let raw = if op == BinOp::Mul {
                Term::mul(Term::to_real(lt), Term::to_real(rt))
            } else {
                Term::div(lt, rt)
            };
            Term::round(raw)
        } else {
            Term::binop(op, lt, rt)
        };
        CValue { v, s: Sym::Term(t) }
    }

    fn default(
        &mut self,
        exceptions: &[Expr],
        just: &Expr,
        cons: &Expr,
        locals: &mut Locals,
    ) -> CValue {
        let start = self.path.len();
        let mut fired: Vec<(CValue, Span)> = Vec::new();
        for x in exceptions {
            let before = self.path.len();
            let v = self.eval(x, locals);
            match v.v {
                Value::Conflict => {
                    if self.opts.early_error {
                        self.path.drain(start..before);
                    }
                    return v;
                }
                Value::Empty => {}
                _ => {
                    fired.push((v, x.span));
                    if self.opts.mode == Mode::Lazy && fired.len() == 2 {
                        break;
                    }
                }
            }
        }
        match fired.len() {
            0 => {
                let jv = strict!(self.eval(just, locals));
                let taken = jv.v == Value::Bool(true);
                self.record(jv.term(), taken, Origin::Justification, just.span);
                if taken {
                    self.eval(cons, locals)
                } else {
                    CValue::concrete(Value::Empty)
                }
            }
            1 => fired.pop().map(|(v, _)| v).expect("one exception"),
            _ => {
                let spans = fired.iter().take(2).map(|(_, s)| *s).collect();
                self.conflict(spans, ConflictReason::Exceptions)
            }
        }
    }

    fn call(&mut self, f: &str, args: Vec<CValue>, span: Span) -> CValue {
        if let Some(fd) = self.prog.function(f) {
            let mut env: Locals = fd.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
            return self.eval(&fd.body, &mut env);
        }
        let Some(sd) = self.prog.scope(f) else {
            return self.conflict(vec![span], ConflictReason::Call);
        };
        let mut env: Locals = sd.inputs.iter().map(|(n, _)| n.clone()).zip(args).collect();
        for a in &sd.assertions {
            let v = strict!(self.eval(a, &mut env));
            let ok = v.v == Value::Bool(true);
            self.record(v.term(), ok, Origin::IfCond, a.span);
            if !ok {
                return self.conflict(vec![a.span], ConflictReason::AssertionFailed);
            }
        }
        for b in &sd.bindings {
            let v = strict!(self.eval(&b.expr, &mut env));
            env.push((b.name.clone(), v));
        }
        let out = &sd.outputs[0];
        match env.iter().rev().find(|(n, _)| n == out) {
            Some((_, v)) => v.clone(),
            None => self.conflict(vec![span], ConflictReason::Internal),
        }
    }
}

fn sym_eq(a: &Sym, b: &Sym) -> Term {
    match (a, b) {
        (Sym::Term(x), Sym::Term(y)) => Term::cmp(CmpOp::Eq, x.clone(), y.clone()),
        (Sym::Struct(xs), Sym::Struct(ys)) => Term::and(
            xs.iter()
                .zip(ys)
                .map(|((_, x), (_, y))| sym_eq(x, y))
                .collect(),
        ),
        (
            Sym::Enum {
                tag: t1,
                payload: p1,
            },
            Sym::Enum {
                tag: t2,
                payload: p2,
            },
        ) => {
            let tags = Term::cmp(CmpOp::Eq, t1.clone(), t2.clone());
            match (p1, p2) {
                (Some(x), Some(y)) => Term::and(vec![tags, sym_eq(x, y)]),
                _ => tags,
            }
        }
        _ => Term::Bool(false),
    }
}

/// Runs a scope with instrumentation. Assertions are evaluated first and
/// each contributes an `Assertion` record; a false one ends the run with a
/// precondition violation.
pub fn run_scope_concolic(
    prog: &Program,
    opaque: &OpaqueRegistry,
    scope: &str,
    inputs: &Env,
    opts: ConcolicOpts,
) -> ConcolicRun {
    let Some(sd) = prog.scope(scope) else {
        return ConcolicRun {
            outcome: Err(RunError::UnknownScope(scope.to_string())),
            path: Vec::new(),
        };
    };
    let concrete = match bind_inputs(prog, sd, inputs) {
        Ok(env) => env,
        Err(e) => {
            return ConcolicRun {
                outcome: Err(e),
                path: Vec::new(),
            }
        }
    };
    let mut env: Locals = concrete
        .into_iter()
        .map(|(n, v)| {
            let t = sd.input_type(&n).expect("bound input").clone();
            let s = input_sym(prog, &n, &t, &v);
            (n, CValue { v, s })
        })
        .collect();
    let mut c = Concolic::new(prog, opaque, opts);
    for (index, a) in sd.assertions.iter().enumerate() {
        let v = c.eval(a, &mut env);
        let ok = v.v == Value::Bool(true);
        if !v.is_abnormal() {
            c.record(v.term(), ok, Origin::Assertion, a.span);
        }
        if !ok {
            return ConcolicRun {
                outcome: Err(RunError::PreconditionViolation {
                    index,
                    span: a.span,
                }),
                path: c.path,
            };
        }
    }
    for b in &sd.bindings {
        let v = c.eval(&b.expr, &mut env);
        match v.v {
            Value::Empty => {
                return ConcolicRun {
                    outcome: Ok(Outcome::Empty),
                    path: c.path,
                }
            }
            Value::Conflict => {
                return ConcolicRun {
                    outcome: Ok(Outcome::Conflict(c.site.clone())),
                    path: c.path,
                }
            }
            _ => env.push((b.name.clone(), v)),
        }
    }
    let plain: Vec<(String, Value)> = env.iter().map(|(n, c)| (n.clone(), c.v.clone())).collect();
    ConcolicRun {
        outcome: Ok(Outcome::Value(collect_outputs(sd, &plain))),
        path: c.path,
    }
}

/// Evaluates an expression over concrete variables treated as inputs of
/// the given types. Used to check instrumentation against the reference
/// interpreter on standalone terms.
pub fn eval_concolic(
    prog: &Program,
    e: &Expr,
    vars: &[(String, SemType, Value)],
    opts: ConcolicOpts,
) -> (Value, Vec<BranchRecord>) {
    let opaque = OpaqueRegistry::standard();
    let mut c = Concolic::new(prog, &opaque, opts);
    let mut env: Locals = vars
        .iter()
        .map(|(n, t, v)| {
            (
                n.clone(),
                CValue {
                    v: v.clone(),
                    s: input_sym(prog, n, t, v),
                },
            )
        })
        .collect();
    let v = c.eval(e, &mut env);
    (v.v, c.path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn branching() -> Expr {
        Expr::default(
            vec![
                Expr::rule(Expr::var("b"), Expr::int(1)),
                Expr::rule(
                    Expr::binary(BinOp::Eq, Expr::var("x"), Expr::int(0)),
                    Expr::int(2),
                ),
            ],
            Expr::binary(BinOp::Gt, Expr::var("x"), Expr::int(0)),
            Expr::int(3),
        )
    }

    fn run(b: bool, x: i64, opts: ConcolicOpts) -> (Value, Vec<String>) {
        let vars = vec![
            ("b".to_string(), SemType::Bool, Value::Bool(b)),
            ("x".to_string(), SemType::Int, Value::int(x)),
        ];
        let (v, path) = eval_concolic(&Program::default(), &branching(), &vars, opts);
        (v, path.iter().map(|r| r.to_string()).collect())
    }

    #[test]
    fn running_example_rows() {
        let o = ConcolicOpts::default();
        assert_eq!(
            run(true, 3, o),
            (Value::int(1), vec!["b:T".into(), "x = 0:F".into()])
        );
        assert_eq!(
            run(true, 0, o),
            (Value::Conflict, vec!["b:T".into(), "x = 0:T".into()])
        );
        assert_eq!(
            run(false, 3, o),
            (
                Value::int(3),
                vec!["b:F".into(), "x = 0:F".into(), "x > 0:T".into()]
            )
        );
        assert_eq!(
            run(false, -1, o),
            (
                Value::Empty,
                vec!["b:F".into(), "x = 0:F".into(), "x > 0:F".into()]
            )
        );
        assert_eq!(
            run(false, 0, o),
            (Value::int(2), vec!["b:F".into(), "x = 0:T".into()])
        );
    }

    #[test]
    fn literal_leaves_path_unchanged() {
        let (v, path) = eval_concolic(
            &Program::default(),
            &Expr::int(7),
            &[],
            ConcolicOpts::default(),
        );
        assert_eq!(v, Value::int(7));
        assert!(path.is_empty());
    }

    #[test]
    fn lazy_stops_at_second_exception() {
        let e = Expr::default(
            vec![
                Expr::rule(Expr::var("a"), Expr::int(1)),
                Expr::rule(Expr::var("b"), Expr::int(2)),
                Expr::rule(Expr::var("c"), Expr::int(3)),
            ],
            Expr::bool(true),
            Expr::int(0),
        );
        let vars: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|n| (n.to_string(), SemType::Bool, Value::Bool(true)))
            .collect();
        let lazy = ConcolicOpts {
            mode: Mode::Lazy,
            early_error: false,
        };
        let (v, p) = eval_concolic(&Program::default(), &e, &vars, lazy);
        assert_eq!(v, Value::Conflict);
        assert_eq!(p.len(), 2);
        let (v, p) = eval_concolic(&Program::default(), &e, &vars, ConcolicOpts::default());
        assert_eq!(v, Value::Conflict);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn early_error_drops_local_constraints() {
        // First exception is empty under a = false, the second divides by x.
        let e = Expr::default(
            vec![
                Expr::rule(Expr::var("a"), Expr::int(1)),
                Expr::rule(
                    Expr::bool(true),
                    Expr::binary(BinOp::Div, Expr::int(1), Expr::var("x")),
                ),
            ],
            Expr::bool(true),
            Expr::int(0),
        );
        let vars = vec![
            ("a".to_string(), SemType::Bool, Value::Bool(false)),
            ("x".to_string(), SemType::Int, Value::int(0)),
        ];
        let (v, p) = eval_concolic(&Program::default(), &e, &vars, ConcolicOpts::default());
        assert_eq!(v, Value::Conflict);
        assert_eq!(p.len(), 3);
        let early = ConcolicOpts {
            mode: Mode::Eager,
            early_error: true,
        };
        let (v, p) = eval_concolic(&Program::default(), &e, &vars, early);
        assert_eq!(v, Value::Conflict);
        let s: Vec<String> = p.iter().map(|r| r.to_string()).collect();
        assert_eq!(s, vec!["true:T", "x = 0:T"]);
    }

    #[test]
    fn income_tax_path() {
        let src = "scope IncomeTax {
            input income: money;
            input nb_children: int;
            def tax_rate: rate = default <
                rule (income <= $10,000 :- 0%),
                rule (nb_children >= 3 :- 15%)
            > (true :- 20%);
            def income_tax: money = income * tax_rate;
            output income_tax;
        }";
        let p = parse(src).unwrap();
        let env: Env = [
            ("income".to_string(), Value::money_cents(0)),
            ("nb_children".to_string(), Value::int(0)),
        ]
        .into_iter()
        .collect();
        let r = run_scope_concolic(
            &p,
            &OpaqueRegistry::standard(),
            "IncomeTax",
            &env,
            ConcolicOpts::default(),
        );
        assert_eq!(
            r.outcome.unwrap(),
            Outcome::Value(vec![("income_tax".into(), Value::money_cents(0))])
        );
        let s: Vec<String> = r.path.iter().map(|r| r.to_string()).collect();
        assert_eq!(s, vec!["income <= 1000000:T", "nb_children >= 3:F"]);
    }

    #[test]
    fn atoms_flatten_and_rebuild() {
        let src = "enum Z { A, B(int) }
            struct P { z: Z, k: money }
            scope S { input p: P; input f: bool; def y: bool = f; output y; }";
        let p = parse(src).unwrap();
        let sd = p.scope("S").unwrap();
        let names: Vec<String> = input_atoms(&p, sd).into_iter().map(|a| a.name).collect();
        assert_eq!(names, vec!["p.z", "p.z#B", "p.k", "f"]);
        let input = Value::Struct {
            ty: "P".into(),
            fields: vec![
                (
                    "z".into(),
                    Value::Enum {
                        ty: "Z".into(),
                        variant: "B".into(),
                        payload: Some(Box::new(Value::int(4))),
                    },
                ),
                ("k".into(), Value::money_cents(250)),
            ],
        };
        let env: Env = [
            ("p".to_string(), input),
            ("f".to_string(), Value::Bool(true)),
        ]
        .into_iter()
        .collect();
        let flat = flatten_inputs(&p, sd, &env);
        assert_eq!(flat["p.k"], Value::int(250));
        assert_eq!(flat["p.z#B"], Value::int(4));
        assert_eq!(rebuild_inputs(&p, sd, &flat), env);
    }

    #[test]
    fn match_records_arm_chain() {
        let src = "enum C { R, G, B }
            scope S { input c: C;
              def y: int = match c { R => 1, G => 2, B => 3 };
              output y; }";
        let p = parse(src).unwrap();
        let blue = Value::Enum {
            ty: "C".into(),
            variant: "B".into(),
            payload: None,
        };
        let env: Env = [("c".to_string(), blue)].into_iter().collect();
        let r = run_scope_concolic(
            &p,
            &OpaqueRegistry::standard(),
            "S",
            &env,
            ConcolicOpts::default(),
        );
        let s: Vec<String> = r.path.iter().map(|r| r.to_string()).collect();
        assert_eq!(s, vec!["c in {R}:F", "c in {G}:F"]);
    }
}
