//! Static checking: declarations, name resolution, typing and call-graph
//! acyclicity. `validate` returns every error it finds rather than stopping
//! at the first one.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ast::*;
use crate::opaque::OpaqueRegistry;
use crate::ops::{binop_type, unop_type};
use crate::value::{SemType, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Declaration,
    UnboundVariable,
    Type,
    JustificationNotBool,
    Pattern,
    Recursion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for StaticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Checks a program with the default set of opaque handlers.
pub fn validate(program: &Program) -> Vec<StaticError> {
    validate_with(program, &OpaqueRegistry::standard())
}

pub fn validate_with(program: &Program, opaque: &OpaqueRegistry) -> Vec<StaticError> {
    let mut c = Checker {
        prog: program,
        opaque,
        errors: Vec::new(),
    };
    c.declarations();
    for f in &program.functions {
        let mut env: Vec<(String, SemType)> = f.params.clone();
        for (p, t) in &f.params {
            c.check_type_exists(t, f.span, &format!("parameter `{p}`"));
        }
        c.check_type_exists(&f.ret, f.span, "return type");
        if let Some(t) = c.expr(&f.body, &mut env, None) {
            if t != f.ret {
                c.err(
                    ErrorKind::Type,
                    f.body.span,
                    format!("function `{}` returns {t}, declared {}", f.name, f.ret),
                );
            }
        }
    }
    for s in &program.scopes {
        c.scope(s);
    }
    c.recursion();
    c.errors
}

/// Scope inputs syntactically reachable from `expr`, expanding references
/// to scope bindings transitively.
pub fn free_input_vars(expr: &Expr, scope: &Scope) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut visiting = HashSet::new();
    collect_inputs(expr, scope, &mut Vec::new(), &mut out, &mut visiting);
    out
}

fn collect_inputs(
    e: &Expr,
    scope: &Scope,
    bound: &mut Vec<String>,
    out: &mut BTreeSet<String>,
    visiting: &mut HashSet<String>,
) {
    match &e.kind {
        ExprKind::Var(x) => {
            if bound.contains(x) {
                return;
            }
            if let Some(b) = scope.binding(x) {
                if visiting.insert(x.clone()) {
                    collect_inputs(&b.expr, scope, &mut Vec::new(), out, visiting);
                }
            } else if scope.input_type(x).is_some() {
                out.insert(x.clone());
            }
        }
        ExprKind::Let(x, b, body) => {
            collect_inputs(b, scope, bound, out, visiting);
            bound.push(x.clone());
            collect_inputs(body, scope, bound, out, visiting);
            bound.pop();
        }
        ExprKind::Match(s, arms) => {
            collect_inputs(s, scope, bound, out, visiting);
            for arm in arms {
                let b = arm.pattern.binder().map(str::to_string);
                if let Some(b) = &b {
                    bound.push(b.clone());
                }
                collect_inputs(&arm.body, scope, bound, out, visiting);
                if b.is_some() {
                    bound.pop();
                }
            }
        }
        _ => {
            for c in e.children() {
                collect_inputs(c, scope, bound, out, visiting);
            }
        }
    }
}

struct Checker<'a> {
    prog: &'a Program,
    opaque: &'a OpaqueRegistry,
    errors: Vec<StaticError>,
}

/// `None` is the type of `empty` and `conflict` literals, compatible with
/// every type.
type Ty = Option<SemType>;

/// Names visible to a scope body besides locals: inputs and bindings
/// declared so far. Assertions are checked before any binding is added.
struct ScopeCtx<'s> {
    visible: &'s HashMap<String, SemType>,
}

impl<'a> Checker<'a> {
    fn err(&mut self, kind: ErrorKind, span: Span, message: impl Into<String>) {
        self.errors.push(StaticError {
            kind,
            span,
            message: message.into(),
        });
    }

    fn declarations(&mut self) {
        let p = self.prog;
        let mut type_names = HashSet::new();
        for e in &p.enums {
            if !type_names.insert(e.name.clone()) {
                self.err(
                    ErrorKind::Declaration,
                    e.span,
                    format!("duplicate type `{}`", e.name),
                );
            }
            if e.variants.is_empty() {
                self.err(
                    ErrorKind::Declaration,
                    e.span,
                    format!("enum `{}` has no variants", e.name),
                );
            }
            let mut seen = HashSet::new();
            for v in &e.variants {
                if !seen.insert(&v.name) {
                    self.err(
                        ErrorKind::Declaration,
                        e.span,
                        format!("duplicate variant `{}` in `{}`", v.name, e.name),
                    );
                }
                if let Some(t) = &v.payload {
                    self.check_type_exists(t, e.span, &format!("payload of `{}`", v.name));
                }
            }
        }
        for s in &p.structs {
            if !type_names.insert(s.name.clone()) {
                self.err(
                    ErrorKind::Declaration,
                    s.span,
                    format!("duplicate type `{}`", s.name),
                );
            }
            let mut seen = HashSet::new();
            for (f, t) in &s.fields {
                if !seen.insert(f) {
                    self.err(
                        ErrorKind::Declaration,
                        s.span,
                        format!("duplicate field `{f}` in `{}`", s.name),
                    );
                }
                self.check_type_exists(t, s.span, &format!("field `{f}`"));
            }
        }
        let mut callables = HashSet::new();
        for f in &p.functions {
            if !callables.insert(f.name.clone()) {
                self.err(
                    ErrorKind::Declaration,
                    f.span,
                    format!("duplicate definition `{}`", f.name),
                );
            }
        }
        for s in &p.scopes {
            if !callables.insert(s.name.clone()) {
                self.err(
                    ErrorKind::Declaration,
                    s.span,
                    format!("duplicate definition `{}`", s.name),
                );
            }
        }
        self.type_cycles();
    }

    /// Structures and enums may not contain themselves.
    fn type_cycles(&mut self) {
        let p = self.prog;
        let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let named = |t: &'a SemType| match t {
            SemType::Enum(n) | SemType::Struct(n) => Some(n.as_str()),
            _ => None,
        };
        for e in &p.enums {
            let out = edges.entry(&e.name).or_default();
            out.extend(
                e.variants
                    .iter()
                    .filter_map(|v| v.payload.as_ref().and_then(named)),
            );
        }
        for s in &p.structs {
            let out = edges.entry(&s.name).or_default();
            out.extend(s.fields.iter().filter_map(|(_, t)| named(t)));
        }
        for start in edges.keys().copied().collect::<Vec<_>>() {
            let mut stack = vec![start];
            let mut seen = HashSet::new();
            while let Some(n) = stack.pop() {
                for &m in edges.get(n).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if m == start {
                        let span = p
                            .enum_decl(start)
                            .map(|d| d.span)
                            .or_else(|| p.struct_decl(start).map(|d| d.span))
                            .unwrap_or(Span::DUMMY);
                        self.err(
                            ErrorKind::Recursion,
                            span,
                            format!("type `{start}` contains itself"),
                        );
                        stack.clear();
                        break;
                    }
                    if seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
        }
    }

    fn check_type_exists(&mut self, t: &SemType, span: Span, what: &str) {
        match t {
            SemType::Enum(n) if self.prog.enum_decl(n).is_none() => self.err(
                ErrorKind::Type,
                span,
                format!("unknown type `{n}` in {what}"),
            ),
            SemType::Struct(n) if self.prog.struct_decl(n).is_none() => self.err(
                ErrorKind::Type,
                span,
                format!("unknown type `{n}` in {what}"),
            ),
            SemType::Func(..) => self.err(
                ErrorKind::Type,
                span,
                format!("function types are not allowed in {what}"),
            ),
            _ => {}
        }
    }

    fn scope(&mut self, s: &Scope) {
        let mut visible: HashMap<String, SemType> = HashMap::new();
        for (n, t) in &s.inputs {
            self.check_type_exists(t, s.span, &format!("input `{n}`"));
            if visible.insert(n.clone(), t.clone()).is_some() {
                self.err(
                    ErrorKind::Declaration,
                    s.span,
                    format!("duplicate input `{n}`"),
                );
            }
        }
        for a in &s.assertions {
            let ctx = ScopeCtx { visible: &visible };
            if let Some(t) = self.expr(a, &mut Vec::new(), Some(&ctx)) {
                if t != SemType::Bool {
                    self.err(
                        ErrorKind::Type,
                        a.span,
                        format!("assertion has type {t}, expected bool"),
                    );
                }
            }
        }
        for b in &s.bindings {
            self.check_type_exists(&b.ty, b.span, &format!("binding `{}`", b.name));
            let ctx = ScopeCtx { visible: &visible };
            if let Some(t) = self.expr(&b.expr, &mut Vec::new(), Some(&ctx)) {
                if t != b.ty {
                    self.err(
                        ErrorKind::Type,
                        b.expr.span,
                        format!("`{}` is declared {} but has type {t}", b.name, b.ty),
                    );
                }
            }
            if visible.insert(b.name.clone(), b.ty.clone()).is_some() {
                self.err(
                    ErrorKind::Declaration,
                    b.span,
                    format!("`{}` is defined twice", b.name),
                );
            }
        }
        let mut seen = HashSet::new();
        for o in &s.outputs {
            if !visible.contains_key(o) {
                self.err(
                    ErrorKind::UnboundVariable,
                    s.span,
                    format!("unknown output `{o}`"),
                );
            }
            if !seen.insert(o) {
                self.err(
                    ErrorKind::Declaration,
                    s.span,
                    format!("duplicate output `{o}`"),
                );
            }
        }
    }

    fn join(&mut self, a: Ty, b: Ty, span: Span, what: &str) -> Ty {
        match (a, b) {
            (None, t) | (t, None) => t,
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), Some(b)) => {
                self.err(ErrorKind::Type, span, format!("{what}: {a} versus {b}"));
                None
            }
        }
    }

    fn expect(&mut self, t: &Ty, want: &SemType, span: Span, kind: ErrorKind, what: &str) {
        if let Some(t) = t {
            if t != want {
                self.err(kind, span, format!("{what} has type {t}, expected {want}"));
            }
        }
    }

    fn expr(
        &mut self,
        e: &Expr,
        locals: &mut Vec<(String, SemType)>,
        ctx: Option<&ScopeCtx>,
    ) -> Ty {
        match &e.kind {
            ExprKind::Var(x) => {
                if let Some((_, t)) = locals.iter().rev().find(|(n, _)| n == x) {
                    return Some(t.clone());
                }
                if let Some(ctx) = ctx {
                    if let Some(t) = ctx.visible.get(x) {
                        return Some(t.clone());
                    }
                }
                self.err(
                    ErrorKind::UnboundVariable,
                    e.span,
                    format!("unbound variable `{x}`"),
                );
                None
            }
            ExprKind::Lit(v) => self.lit_type(v),
            ExprKind::Binary(op, l, r) => {
                let lt = self.expr(l, locals, ctx);
                let rt = self.expr(r, locals, ctx);
                match (lt, rt) {
                    (Some(a), Some(b)) => match binop_type(*op, &a, &b) {
                        Ok(t) => Some(t),
                        Err(m) => {
                            self.err(ErrorKind::Type, e.span, m);
                            None
                        }
                    },
                    (a, b) => {
                        if op.is_comparison() || matches!(op, BinOp::And | BinOp::Or) {
                            Some(SemType::Bool)
                        } else {
                            a.or(b)
                        }
                    }
                }
            }
            ExprKind::Unary(op, x) => {
                let t = self.expr(x, locals, ctx)?;
                match unop_type(*op, &t) {
                    Ok(t) => Some(t),
                    Err(m) => {
                        self.err(ErrorKind::Type, e.span, m);
                        None
                    }
                }
            }
            ExprKind::If(c, t, f) => {
                let ct = self.expr(c, locals, ctx);
                self.expect(&ct, &SemType::Bool, c.span, ErrorKind::Type, "condition");
                let tt = self.expr(t, locals, ctx);
                let ft = self.expr(f, locals, ctx);
                self.join(tt, ft, e.span, "branches of `if` differ")
            }
            ExprKind::Match(s, arms) => self.match_expr(e, s, arms, locals, ctx),
            ExprKind::StructMake(name, fields) => {
                let Some(decl) = self.prog.struct_decl(name) else {
                    self.err(
                        ErrorKind::Type,
                        e.span,
                        format!("unknown structure `{name}`"),
                    );
                    for (_, f) in fields {
                        self.expr(f, locals, ctx);
                    }
                    return None;
                };
                let mut seen = HashSet::new();
                for (f, fe) in fields {
                    let ft = self.expr(fe, locals, ctx);
                    if !seen.insert(f) {
                        self.err(ErrorKind::Type, fe.span, format!("field `{f}` given twice"));
                    }
                    match decl.fields.iter().find(|(n, _)| n == f) {
                        Some((_, want)) => self.expect(
                            &ft,
                            want,
                            fe.span,
                            ErrorKind::Type,
                            &format!("field `{f}`"),
                        ),
                        None => self.err(
                            ErrorKind::Type,
                            fe.span,
                            format!("`{name}` has no field `{f}`"),
                        ),
                    }
                }
                for (f, _) in &decl.fields {
                    if !seen.contains(f) {
                        self.err(ErrorKind::Type, e.span, format!("missing field `{f}`"));
                    }
                }
                Some(SemType::Struct(name.clone()))
            }
            ExprKind::FieldGet(x, f) => {
                let t = self.expr(x, locals, ctx)?;
                let SemType::Struct(name) = &t else {
                    self.err(ErrorKind::Type, e.span, format!("field access on {t}"));
                    return None;
                };
                let ft = self
                    .prog
                    .struct_decl(name)
                    .and_then(|d| d.fields.iter().find(|(n, _)| n == f))
                    .map(|(_, t)| t.clone());
                if ft.is_none() {
                    self.err(
                        ErrorKind::Type,
                        e.span,
                        format!("`{name}` has no field `{f}`"),
                    );
                }
                ft
            }
            ExprKind::EnumMake(ty, v, payload) => {
                let pt = payload
                    .as_ref()
                    .map(|p| (self.expr(p, locals, ctx), p.span));
                let Some(decl) = self.prog.enum_decl(ty) else {
                    self.err(ErrorKind::Type, e.span, format!("unknown enum `{ty}`"));
                    return None;
                };
                let Some(var) = decl.variant(v) else {
                    self.err(
                        ErrorKind::Type,
                        e.span,
                        format!("`{ty}` has no variant `{v}`"),
                    );
                    return Some(SemType::Enum(ty.clone()));
                };
                match (&var.payload, pt) {
                    (None, None) => {}
                    (Some(want), Some((t, span))) => {
                        self.expect(&t, want, span, ErrorKind::Type, "payload")
                    }
                    (Some(_), None) => self.err(
                        ErrorKind::Type,
                        e.span,
                        format!("`{ty}::{v}` needs a payload"),
                    ),
                    (None, Some(_)) => self.err(
                        ErrorKind::Type,
                        e.span,
                        format!("`{ty}::{v}` takes no payload"),
                    ),
                }
                Some(SemType::Enum(ty.clone()))
            }
            ExprKind::Let(x, b, body) => {
                let bt = self.expr(b, locals, ctx);
                let Some(bt) = bt else {
                    self.err(
                        ErrorKind::Type,
                        b.span,
                        "cannot infer the type of a `let` binding",
                    );
                    return None;
                };
                locals.push((x.clone(), bt));
                let t = self.expr(body, locals, ctx);
                locals.pop();
                t
            }
            ExprKind::Call(f, args) => {
                let arg_tys: Vec<(Ty, Span)> = args
                    .iter()
                    .map(|a| (self.expr(a, locals, ctx), a.span))
                    .collect();
                let sig: Option<(Vec<SemType>, SemType)> = if let Some(fd) = self.prog.function(f) {
                    Some((
                        fd.params.iter().map(|(_, t)| t.clone()).collect(),
                        fd.ret.clone(),
                    ))
                } else if let Some(sd) = self.prog.scope(f) {
                    if sd.outputs.len() != 1 {
                        self.err(
                            ErrorKind::Type,
                            e.span,
                            format!("scope `{f}` must have exactly one output to be called"),
                        );
                        return None;
                    }
                    sd.output_type(&sd.outputs[0]).map(|r| {
                        (
                            sd.inputs.iter().map(|(_, t)| t.clone()).collect(),
                            r.clone(),
                        )
                    })
                } else {
                    self.err(
                        ErrorKind::UnboundVariable,
                        e.span,
                        format!("unknown function `{f}`"),
                    );
                    return None;
                };
                let (params, ret) = sig?;
                if params.len() != arg_tys.len() {
                    self.err(
                        ErrorKind::Type,
                        e.span,
                        format!(
                            "`{f}` expects {} arguments, got {}",
                            params.len(),
                            arg_tys.len()
                        ),
                    );
                } else {
                    for (i, ((t, span), want)) in arg_tys.iter().zip(&params).enumerate() {
                        self.expect(
                            t,
                            want,
                            *span,
                            ErrorKind::Type,
                            &format!("argument {}", i + 1),
                        );
                    }
                }
                Some(ret)
            }
            ExprKind::Default {
                exceptions,
                just,
                cons,
            } => {
                let mut t: Ty = None;
                for x in exceptions {
                    let xt = self.expr(x, locals, ctx);
                    t = self.join(t, xt, x.span, "exceptions of a default disagree");
                }
                let jt = self.expr(just, locals, ctx);
                self.expect(
                    &jt,
                    &SemType::Bool,
                    just.span,
                    ErrorKind::JustificationNotBool,
                    "justification",
                );
                let ct = self.expr(cons, locals, ctx);
                self.join(t, ct, cons.span, "consequence and exceptions disagree")
            }
            ExprKind::Assert(c, body) => {
                let ct = self.expr(c, locals, ctx);
                self.expect(&ct, &SemType::Bool, c.span, ErrorKind::Type, "assertion");
                self.expr(body, locals, ctx)
            }
            ExprKind::Opaque(tag, args) => {
                let mut tys = Vec::new();
                for a in args {
                    tys.push(self.expr(a, locals, ctx));
                }
                let Some(h) = self.opaque.get(tag) else {
                    self.err(ErrorKind::Type, e.span, format!("no handler for `@{tag}`"));
                    return None;
                };
                if tys.iter().any(|t| t.is_none()) {
                    return None;
                }
                let tys: Vec<SemType> = tys.into_iter().flatten().collect();
                match h.result_type(&tys) {
                    Ok(t) => Some(t),
                    Err(m) => {
                        self.err(ErrorKind::Type, e.span, format!("`@{tag}`: {m}"));
                        None
                    }
                }
            }
        }
    }

    fn lit_type(&mut self, v: &Value) -> Ty {
        match v {
            Value::Bool(_) => Some(SemType::Bool),
            Value::Int(_) => Some(SemType::Int),
            Value::Rat(_) => Some(SemType::Rat),
            Value::Money(_) => Some(SemType::Money),
            Value::Enum { ty, .. } => Some(SemType::Enum(ty.clone())),
            Value::Struct { ty, .. } => Some(SemType::Struct(ty.clone())),
            Value::Empty | Value::Conflict => None,
        }
    }

    fn match_expr(
        &mut self,
        e: &Expr,
        s: &Expr,
        arms: &[MatchArm],
        locals: &mut Vec<(String, SemType)>,
        ctx: Option<&ScopeCtx>,
    ) -> Ty {
        let st = self.expr(s, locals, ctx);
        let decl = match &st {
            Some(SemType::Enum(n)) => self.prog.enum_decl(n),
            Some(t) => {
                self.err(ErrorKind::Type, s.span, format!("cannot match on {t}"));
                None
            }
            None => None,
        };
        if arms.is_empty() {
            self.err(ErrorKind::Pattern, e.span, "match has no arms");
            return None;
        }
        let mut covered: HashSet<String> = HashSet::new();
        let mut has_wildcard = false;
        let mut result: Ty = None;
        for (i, arm) in arms.iter().enumerate() {
            if has_wildcard {
                self.err(
                    ErrorKind::Pattern,
                    arm.body.span,
                    "arm after a wildcard is unreachable",
                );
            }
            let mut bind: Option<(String, SemType)> = None;
            match &arm.pattern {
                Pattern::Wildcard => has_wildcard = true,
                Pattern::Variants { names, binder } => {
                    if let Some(d) = decl {
                        for n in names {
                            match d.variant(n) {
                                None => self.err(
                                    ErrorKind::Pattern,
                                    arm.body.span,
                                    format!("`{}` has no variant `{n}`", d.name),
                                ),
                                Some(_) if !covered.insert(n.clone()) => self.err(
                                    ErrorKind::Pattern,
                                    arm.body.span,
                                    format!("variant `{n}` matched twice"),
                                ),
                                Some(_) => {}
                            }
                        }
                        if let Some(b) = binder {
                            let payload = if names.len() == 1 {
                                d.variant(&names[0]).and_then(|v| v.payload.clone())
                            } else {
                                None
                            };
                            match payload {
                                Some(t) => bind = Some((b.clone(), t)),
                                None => self.err(
                                    ErrorKind::Pattern,
                                    arm.body.span,
                                    format!("binder `{b}` needs a single variant with a payload"),
                                ),
                            }
                        }
                    }
                }
            }
            let pushed = bind.is_some();
            if let Some(b) = bind {
                locals.push(b);
            }
            let at = self.expr(&arm.body, locals, ctx);
            if pushed {
                locals.pop();
            }
            result = self.join(
                result,
                at,
                arm.body.span,
                &format!("arm {} disagrees", i + 1),
            );
        }
        if let Some(d) = decl {
            if !has_wildcard {
                let missing: Vec<&str> = d
                    .variants
                    .iter()
                    .filter(|v| !covered.contains(&v.name))
                    .map(|v| v.name.as_str())
                    .collect();
                if !missing.is_empty() {
                    self.err(
                        ErrorKind::Pattern,
                        e.span,
                        format!("non-exhaustive match, missing {}", missing.join(", ")),
                    );
                }
            }
        }
        result
    }

    fn recursion(&mut self) {
        let p = self.prog;
        let mut graph: BTreeMap<&str, Vec<(&str, Span)>> = BTreeMap::new();
        let calls_of = |roots: Vec<&'a Expr>| {
            let mut v = Vec::new();
            for r in roots {
                r.walk(&mut |e| {
                    if let ExprKind::Call(f, _) = &e.kind {
                        v.push((f.as_str(), e.span));
                    }
                });
            }
            v
        };
        for f in &p.functions {
            graph.insert(&f.name, calls_of(vec![&f.body]));
        }
        for s in &p.scopes {
            let roots: Vec<&Expr> = s
                .assertions
                .iter()
                .chain(s.bindings.iter().map(|b| &b.expr))
                .collect();
            graph.insert(&s.name, calls_of(roots));
        }
        // Iterative DFS with colors; one error per back edge.
        let mut color: HashMap<&str, u8> = HashMap::new();
        let nodes: Vec<&str> = graph.keys().copied().collect();
        for root in nodes {
            if color.get(root).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
            color.insert(root, 1);
            while let Some((n, i)) = stack.pop() {
                let succ = graph.get(n).map(|v| v.as_slice()).unwrap_or(&[]);
                if i < succ.len() {
                    stack.push((n, i + 1));
                    let (m, span) = succ[i];
                    if !graph.contains_key(m) {
                        continue;
                    }
                    match color.get(m).copied().unwrap_or(0) {
                        0 => {
                            color.insert(m, 1);
                            stack.push((m, 0));
                        }
                        1 => self.err(
                            ErrorKind::Recursion,
                            span,
                            format!("recursive call from `{n}` to `{m}`"),
                        ),
                        _ => {}
                    }
                } else {
                    color.insert(n, 2);
                }
            }
        }
    }
}
