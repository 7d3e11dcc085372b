//! Reference interpreter. Default terms follow either the eager rules
//! (every exception is evaluated, stopping only at a conflict) or the lazy
//! rules (evaluation stops at the second exception that fires).
//!
//! Evaluation is strict left to right. Any `Empty` or `Conflict` reaching a
//! strict position stops evaluation and becomes the result.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::*;
use crate::opaque::OpaqueRegistry;
use crate::ops::{eval_binop, eval_unop, is_zero_value};
use crate::value::{SemType, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Eager,
    Lazy,
}

/// Concrete inputs of a scope run, by input name.
pub type Env = BTreeMap<String, Value>;

/// Where a conflict originated: the first two exceptions that fired, or the
/// node raising a runtime error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictSite {
    pub spans: Vec<Span>,
    pub reason: ConflictReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConflictReason {
    Exceptions,
    DivisionByZero,
    AssertionFailed,
    OpaqueFailure,
    Literal,
    Call,
    Internal,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Vec<(String, Value)>),
    Empty,
    Conflict(Option<ConflictSite>),
}

/// Outcomes compare by class and value; conflict sites are diagnostics.
impl PartialEq for Outcome {
    fn eq(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Value(a), Outcome::Value(b)) => a == b,
            (Outcome::Empty, Outcome::Empty) => true,
            (Outcome::Conflict(_), Outcome::Conflict(_)) => true,
            _ => false,
        }
    }
}

impl Eq for Outcome {}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "value",
            Outcome::Empty => "empty",
            Outcome::Conflict(_) => "conflict",
        }
    }

    pub fn is_abnormal(&self) -> bool {
        !matches!(self, Outcome::Value(_))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(vs) => {
                for (i, (n, v)) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n} = {v}")?;
                }
                Ok(())
            }
            Outcome::Empty => f.write_str("empty"),
            Outcome::Conflict(_) => f.write_str("conflict"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("unexpected input `{0}`")]
    UnexpectedInput(String),
    #[error("input `{name}` is not a value of type {ty}")]
    InputType { name: String, ty: SemType },
    #[error("assertion {index} does not hold")]
    PreconditionViolation { index: usize, span: Span },
}

/// Whether `v` is a normal value of type `ty`.
pub fn value_has_type(prog: &Program, v: &Value, ty: &SemType) -> bool {
    match (v, ty) {
        (Value::Bool(_), SemType::Bool)
        | (Value::Int(_), SemType::Int)
        | (Value::Rat(_), SemType::Rat)
        | (Value::Money(_), SemType::Money) => true,
        (
            Value::Enum {
                ty: vt,
                variant,
                payload,
            },
            SemType::Enum(n),
        ) => {
            vt == n
                && prog
                    .enum_decl(n)
                    .and_then(|d| d.variant(variant))
                    .is_some_and(|var| match (&var.payload, payload) {
                        (None, None) => true,
                        (Some(t), Some(p)) => value_has_type(prog, p, t),
                        _ => false,
                    })
        }
        (Value::Struct { ty: vt, fields }, SemType::Struct(n)) => {
            vt == n
                && prog.struct_decl(n).is_some_and(|d| {
                    d.fields.len() == fields.len()
                        && d.fields.iter().zip(fields).all(|((dn, dt), (fname, fv))| {
                            dn == fname && value_has_type(prog, fv, dt)
                        })
                })
        }
        _ => false,
    }
}

/// The reproducible starting value of an input: false, zero, the first
/// variant (payload defaulted) or a structure of defaults.
pub fn default_value(prog: &Program, ty: &SemType) -> Value {
    match ty {
        SemType::Bool => Value::Bool(false),
        SemType::Int => Value::int(0),
        SemType::Rat => Value::rat(0, 1),
        SemType::Money => Value::money_cents(0),
        SemType::Enum(n) => {
            let d = prog.enum_decl(n).expect("validated enum");
            let v = &d.variants[0];
            Value::Enum {
                ty: n.clone(),
                variant: v.name.clone(),
                payload: v.payload.as_ref().map(|t| Box::new(default_value(prog, t))),
            }
        }
        SemType::Struct(n) => {
            let d = prog.struct_decl(n).expect("validated struct");
            Value::Struct {
                ty: n.clone(),
                fields: d
                    .fields
                    .iter()
                    .map(|(f, t)| (f.clone(), default_value(prog, t)))
                    .collect(),
            }
        }
        SemType::Func(..) => Value::Conflict,
    }
}

pub struct Interp<'p> {
    prog: &'p Program,
    opaque: &'p OpaqueRegistry,
    mode: Mode,
    site: Option<ConflictSite>,
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

impl<'p> Interp<'p> {
    pub fn new(prog: &'p Program, opaque: &'p OpaqueRegistry, mode: Mode) -> Interp<'p> {
        Interp {
            prog,
            opaque,
            mode,
            site: None,
        }
    }

    /// Origin of the conflict produced by the last evaluation, if any.
    pub fn conflict_site(&self) -> Option<&ConflictSite> {
        self.site.as_ref()
    }

    fn conflict(&mut self, spans: Vec<Span>, reason: ConflictReason) -> Value {
        if self.site.is_none() {
            self.site = Some(ConflictSite { spans, reason });
        }
        Value::Conflict
    }

    /// Evaluates `e` with `locals` as the variable environment (innermost
    /// binding last).
    pub fn eval(&mut self, e: &Expr, locals: &mut Vec<(String, Value)>) -> Value {
        match &e.kind {
            ExprKind::Var(x) => match locals.iter().rev().find(|(n, _)| n == x) {
                Some((_, v)) => v.clone(),
                None => self.conflict(vec![e.span], ConflictReason::Internal),
            },
            ExprKind::Lit(Value::Conflict) => self.conflict(vec![e.span], ConflictReason::Literal),
            ExprKind::Lit(v) => v.clone(),
            ExprKind::Binary(op, l, r) => {
                let lv = strict!(self.eval(l, locals));
                let rv = strict!(self.eval(r, locals));
                if *op == BinOp::Div && is_zero_value(&rv) {
                    return self.conflict(vec![e.span], ConflictReason::DivisionByZero);
                }
                eval_binop(*op, &lv, &rv)
            }
            ExprKind::Unary(op, x) => {
                let v = strict!(self.eval(x, locals));
                eval_unop(*op, &v)
            }
            ExprKind::If(c, t, f) => {
                let cv = strict!(self.eval(c, locals));
                if cv == Value::Bool(true) {
                    self.eval(t, locals)
                } else {
                    self.eval(f, locals)
                }
            }
            ExprKind::Match(s, arms) => {
                let sv = strict!(self.eval(s, locals));
                let Value::Enum {
                    variant, payload, ..
                } = &sv
                else {
                    return self.conflict(vec![e.span], ConflictReason::Internal);
                };
                for arm in arms {
                    let hit = match &arm.pattern {
                        Pattern::Wildcard => true,
                        Pattern::Variants { names, .. } => names.contains(variant),
                    };
                    if hit {
                        return match (arm.pattern.binder(), payload) {
                            (Some(b), Some(p)) => {
                                locals.push((b.to_string(), (**p).clone()));
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
                Value::Struct {
                    ty: name.clone(),
                    fields: vals,
                }
            }
            ExprKind::FieldGet(x, f) => {
                let v = strict!(self.eval(x, locals));
                match v {
                    Value::Struct { fields, .. } => fields
                        .into_iter()
                        .find(|(n, _)| n == f)
                        .map(|(_, v)| v)
                        .unwrap_or(Value::Conflict),
                    _ => Value::Conflict,
                }
            }
            ExprKind::EnumMake(ty, v, p) => {
                let payload = match p {
                    Some(p) => Some(Box::new(strict!(self.eval(p, locals)))),
                    None => None,
                };
                Value::Enum {
                    ty: ty.clone(),
                    variant: v.clone(),
                    payload,
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
                if cv != Value::Bool(true) {
                    return self.conflict(vec![c.span], ConflictReason::AssertionFailed);
                }
                self.eval(body, locals)
            }
            ExprKind::Opaque(tag, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(strict!(self.eval(a, locals)));
                }
                match self.opaque.get(tag).and_then(|h| h.eval(&vals)) {
                    Some(v) => v,
                    None => self.conflict(vec![e.span], ConflictReason::OpaqueFailure),
                }
            }
        }
    }

    fn default(
        &mut self,
        exceptions: &[Expr],
        just: &Expr,
        cons: &Expr,
        locals: &mut Vec<(String, Value)>,
    ) -> Value {
        let mut fired: Vec<(Value, Span)> = Vec::new();
        for x in exceptions {
            let v = self.eval(x, locals);
            match v {
                Value::Conflict => return v,
                Value::Empty => {}
                v => {
                    fired.push((v, x.span));
                    if self.mode == Mode::Lazy && fired.len() == 2 {
                        break;
                    }
                }
            }
        }
        match fired.len() {
            0 => {
                let jv = strict!(self.eval(just, locals));
                if jv == Value::Bool(true) {
                    self.eval(cons, locals)
                } else {
                    Value::Empty
                }
            }
            1 => fired.pop().map(|(v, _)| v).expect("one exception"),
            _ => {
                let spans = fired.iter().take(2).map(|(_, s)| *s).collect();
                self.conflict(spans, ConflictReason::Exceptions)
            }
        }
    }

    fn call(&mut self, f: &str, args: Vec<Value>, span: Span) -> Value {
        if let Some(fd) = self.prog.function(f) {
            let mut env: Vec<(String, Value)> =
                fd.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
            return self.eval(&fd.body, &mut env);
        }
        let Some(sd) = self.prog.scope(f) else {
            return self.conflict(vec![span], ConflictReason::Call);
        };
        let mut env: Vec<(String, Value)> =
            sd.inputs.iter().map(|(n, _)| n.clone()).zip(args).collect();
        for a in &sd.assertions {
            let v = strict!(self.eval(a, &mut env));
            if v != Value::Bool(true) {
                return self.conflict(vec![a.span], ConflictReason::AssertionFailed);
            }
        }
        for b in &sd.bindings {
            let v = strict!(self.eval(&b.expr, &mut env));
            env.push((b.name.clone(), v));
        }
        let out = &sd.outputs[0];
        env.iter()
            .rev()
            .find(|(n, _)| n == out)
            .map(|(_, v)| v.clone())
            .unwrap_or(Value::Conflict)
    }
}

/// Evaluates a closed expression, or one over `env`.
pub fn eval(prog: &Program, e: &Expr, env: &Env, mode: Mode) -> Value {
    let opaque = OpaqueRegistry::standard();
    let mut it = Interp::new(prog, &opaque, mode);
    let mut locals: Vec<(String, Value)> =
        env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    it.eval(e, &mut locals)
}

/// Checks that `inputs` matches the scope signature and returns them in
/// declaration order.
pub fn bind_inputs(
    prog: &Program,
    scope: &Scope,
    inputs: &Env,
) -> Result<Vec<(String, Value)>, RunError> {
    for k in inputs.keys() {
        if scope.input_type(k).is_none() {
            return Err(RunError::UnexpectedInput(k.clone()));
        }
    }
    let mut env = Vec::new();
    for (n, t) in &scope.inputs {
        let v = inputs
            .get(n)
            .ok_or_else(|| RunError::MissingInput(n.clone()))?;
        if !value_has_type(prog, v, t) {
            return Err(RunError::InputType {
                name: n.clone(),
                ty: t.clone(),
            });
        }
        env.push((n.clone(), v.clone()));
    }
    Ok(env)
}

pub fn run_scope(
    prog: &Program,
    scope: &str,
    inputs: &Env,
    mode: Mode,
) -> Result<Outcome, RunError> {
    run_scope_with(prog, &OpaqueRegistry::standard(), scope, inputs, mode)
}

/// Runs a scope: assertions first (a false one is a precondition
/// violation), then the bindings in order.
pub fn run_scope_with(
    prog: &Program,
    opaque: &OpaqueRegistry,
    scope: &str,
    inputs: &Env,
    mode: Mode,
) -> Result<Outcome, RunError> {
    let sd = prog
        .scope(scope)
        .ok_or_else(|| RunError::UnknownScope(scope.to_string()))?;
    let mut env = bind_inputs(prog, sd, inputs)?;
    let mut it = Interp::new(prog, opaque, mode);
    for (index, a) in sd.assertions.iter().enumerate() {
        if it.eval(a, &mut env) != Value::Bool(true) {
            return Err(RunError::PreconditionViolation {
                index,
                span: a.span,
            });
        }
    }
    for b in &sd.bindings {
        let v = it.eval(&b.expr, &mut env);
        match v {
            Value::Empty => return Ok(Outcome::Empty),
            Value::Conflict => return Ok(Outcome::Conflict(it.site.clone())),
            v => env.push((b.name.clone(), v)),
        }
    }
    Ok(Outcome::Value(collect_outputs(sd, &env)))
}

pub(crate) fn collect_outputs(sd: &Scope, env: &[(String, Value)]) -> Vec<(String, Value)> {
    sd.outputs
        .iter()
        .map(|o| {
            let v = env
                .iter()
                .rev()
                .find(|(n, _)| n == o)
                .map(|(_, v)| v.clone())
                .unwrap_or(Value::Empty);
            (o.clone(), v)
        })
        .collect()
}
