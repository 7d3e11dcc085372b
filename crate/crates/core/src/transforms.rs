//! Source rewrites applied before exploration: folding match arms with
//! identical bodies, grouping exceptions by the inputs they read, and
//! partial evaluation of trivial defaults and boolean constants.

use std::collections::BTreeSet;

use crate::ast::*;
use crate::ops::eval_binop;
use crate::validate::free_input_vars;
use crate::value::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransformReport {
    pub arms_folded: usize,
    pub exceptions_regrouped: usize,
    pub defaults_simplified: usize,
    pub booleans_folded: usize,
}

impl TransformReport {
    pub fn is_zero(&self) -> bool {
        *self == TransformReport::default()
    }
}

/// Which rewrites to run; see [`apply`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Selection {
    pub folding: bool,
    pub reorder: bool,
    pub frontend: bool,
}

/// Runs the selected rewrites in the order frontend, folding, reorder.
pub fn apply(prog: &Program, sel: Selection) -> (Program, TransformReport) {
    let mut p = prog.clone();
    let mut report = TransformReport::default();
    if sel.frontend {
        let (q, r) = simplify_frontend(&p);
        p = q;
        report.defaults_simplified += r.defaults_simplified;
        report.booleans_folded += r.booleans_folded;
    }
    if sel.folding {
        let (q, n) = fold_program(&p);
        p = q;
        report.arms_folded += n;
    }
    if sel.reorder {
        let (q, n) = reorder_program(&p);
        p = q;
        report.exceptions_regrouped += n;
    }
    (p, report)
}

fn map_roots(prog: &Program, f: &mut dyn FnMut(&Expr, Option<&Scope>) -> Expr) -> Program {
    let mut p = prog.clone();
    for fd in &mut p.functions {
        fd.body = f(&fd.body, None);
    }
    for (i, s) in prog.scopes.iter().enumerate() {
        let out = &mut p.scopes[i];
        for (a, orig) in out.assertions.iter_mut().zip(&s.assertions) {
            *a = f(orig, Some(s));
        }
        for (b, orig) in out.bindings.iter_mut().zip(&s.bindings) {
            b.expr = f(&orig.expr, Some(s));
        }
    }
    p
}

/// Rebuilds `e` bottom-up, applying `f` to every node after its children.
fn rewrite(e: &Expr, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
    let mut out = e.clone();
    for c in out.children_mut() {
        *c = rewrite(c, f);
    }
    f(out)
}

/// Names used but not bound inside `e`.
pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    fn go(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match &e.kind {
            ExprKind::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            ExprKind::Let(x, b, body) => {
                go(b, bound, out);
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            ExprKind::Match(s, arms) => {
                go(s, bound, out);
                for arm in arms {
                    let b = arm.pattern.binder();
                    if let Some(b) = b {
                        bound.push(b.to_string());
                    }
                    go(&arm.body, bound, out);
                    if b.is_some() {
                        bound.pop();
                    }
                }
            }
            _ => {
                for c in e.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

/// Structural equality up to renaming of `let` and pattern binders.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    fn go(a: &Expr, b: &Expr, env: &mut Vec<(String, String)>) -> bool {
        match (&a.kind, &b.kind) {
            (ExprKind::Var(x), ExprKind::Var(y)) => {
                match env.iter().rev().find(|(l, r)| l == x || r == y) {
                    Some((l, r)) => l == x && r == y,
                    None => x == y,
                }
            }
            (ExprKind::Let(x, b1, body1), ExprKind::Let(y, b2, body2)) => {
                if !go(b1, b2, env) {
                    return false;
                }
                env.push((x.clone(), y.clone()));
                let r = go(body1, body2, env);
                env.pop();
                r
            }
            (ExprKind::Match(s1, arms1), ExprKind::Match(s2, arms2)) => {
                if !go(s1, s2, env) || arms1.len() != arms2.len() {
                    return false;
                }
                arms1.iter().zip(arms2).all(|(x, y)| {
                    let same_shape = match (&x.pattern, &y.pattern) {
                        (Pattern::Wildcard, Pattern::Wildcard) => true,
                        (
                            Pattern::Variants {
                                names: n1,
                                binder: b1,
                            },
                            Pattern::Variants {
                                names: n2,
                                binder: b2,
                            },
                        ) => n1 == n2 && b1.is_some() == b2.is_some(),
                        _ => false,
                    };
                    if !same_shape {
                        return false;
                    }
                    match (x.pattern.binder(), y.pattern.binder()) {
                        (Some(p), Some(q)) => {
                            env.push((p.to_string(), q.to_string()));
                            let r = go(&x.body, &y.body, env);
                            env.pop();
                            r
                        }
                        _ => go(&x.body, &y.body, env),
                    }
                })
            }
            (ka, kb) => {
                if std::mem::discriminant(ka) != std::mem::discriminant(kb) {
                    return false;
                }
                let mut sa = a.clone();
                let mut sb = b.clone();
                for c in sa.children_mut() {
                    *c = Expr::lit(Value::Empty);
                }
                for c in sb.children_mut() {
                    *c = Expr::lit(Value::Empty);
                }
                sa == sb
                    && a.children()
                        .iter()
                        .zip(b.children())
                        .all(|(x, y)| go(x, y, env))
            }
        }
    }
    go(a, b, &mut Vec::new())
}

fn fold_program(prog: &Program) -> (Program, usize) {
    let mut n = 0;
    let p = map_roots(prog, &mut |e, _| {
        let (e2, k) = fold_match_cases(prog, e);
        n += k;
        e2
    });
    (p, n)
}

/// Merges match arms whose bodies are alpha-equivalent and do not use the
/// payload binder. If the merged arms cover the remaining variants, the last
/// group becomes a wildcard. Returns the number of arms removed.
pub fn fold_match_cases(prog: &Program, e: &Expr) -> (Expr, usize) {
    let mut removed = 0;
    let out = rewrite(e, &mut |node| {
        let ExprKind::Match(scrut, arms) = &node.kind else {
            return node;
        };
        let Some(all) = match_variants(prog, arms) else {
            return node;
        };
        let mut covered: Vec<String> = Vec::new();
        // (variants, binder, body)
        let mut groups: Vec<(Vec<String>, Option<String>, Expr)> = Vec::new();
        for arm in arms {
            let names: Vec<String> = match &arm.pattern {
                Pattern::Wildcard => all
                    .iter()
                    .filter(|v| !covered.contains(v))
                    .cloned()
                    .collect(),
                Pattern::Variants { names, .. } => names
                    .iter()
                    .filter(|v| !covered.contains(v))
                    .cloned()
                    .collect(),
            };
            covered.extend(names.iter().cloned());
            let binder = arm
                .pattern
                .binder()
                .filter(|b| free_vars(&arm.body).contains(*b))
                .map(str::to_string);
            if binder.is_none() {
                if let Some(g) = groups
                    .iter_mut()
                    .find(|(_, gb, body)| gb.is_none() && alpha_eq(body, &arm.body))
                {
                    g.0.extend(names);
                    continue;
                }
            }
            groups.push((names, binder, arm.body.clone()));
        }
        if groups.len() >= arms.len() {
            return node;
        }
        removed += arms.len() - groups.len();
        let last = groups.len() - 1;
        let new_arms = groups
            .into_iter()
            .enumerate()
            .map(|(i, (names, binder, body))| MatchArm {
                pattern: if i == last && binder.is_none() {
                    Pattern::Wildcard
                } else {
                    Pattern::Variants { names, binder }
                },
                body,
            })
            .collect();
        Expr::new(ExprKind::Match(scrut.clone(), new_arms), node.span)
    });
    (out, removed)
}

/// The variants of the matched enumeration, found through the arm names.
fn match_variants(prog: &Program, arms: &[MatchArm]) -> Option<Vec<String>> {
    let name = arms.iter().find_map(|a| match &a.pattern {
        Pattern::Variants { names, .. } => names.first(),
        Pattern::Wildcard => None,
    })?;
    prog.enums
        .iter()
        .find(|d| d.variant(name).is_some() && arms.iter().all(|a| arm_names_in(a, d)))
        .map(|d| d.variant_names())
}

fn arm_names_in(a: &MatchArm, d: &EnumDecl) -> bool {
    match &a.pattern {
        Pattern::Wildcard => true,
        Pattern::Variants { names, .. } => names.iter().all(|n| d.variant(n).is_some()),
    }
}

fn reorder_program(prog: &Program) -> (Program, usize) {
    let mut n = 0;
    let p = map_roots(prog, &mut |e, scope| {
        let (e2, k) = reorder_exceptions(e, scope);
        n += k;
        e2
    });
    (p, n)
}

/// Stable-sorts the exceptions of every default term by the sorted set of
/// inputs they read (free variables outside scopes). Returns how many
/// default terms changed order.
pub fn reorder_exceptions(e: &Expr, scope: Option<&Scope>) -> (Expr, usize) {
    let mut changed = 0;
    let out = rewrite(e, &mut |mut node| {
        if let ExprKind::Default { exceptions, .. } = &mut node.kind {
            let keyed: Vec<(Vec<String>, Expr)> = exceptions
                .drain(..)
                .map(|x| {
                    let vars = match scope {
                        Some(s) => free_input_vars(&x, s),
                        None => free_vars(&x),
                    };
                    (vars.into_iter().collect(), x)
                })
                .collect();
            let mut sorted = keyed.clone();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            if sorted
                .iter()
                .zip(&keyed)
                .any(|(a, b)| a.1.span != b.1.span || a.1 != b.1)
            {
                changed += 1;
            }
            *exceptions = sorted.into_iter().map(|(_, x)| x).collect();
        }
        node
    });
    (out, changed)
}

/// Replaces `<| true :- e>` by `e` and `<| false :- e>` by `empty`, and
/// folds boolean connectives and conditionals on constants.
pub fn simplify_frontend(prog: &Program) -> (Program, TransformReport) {
    let mut report = TransformReport::default();
    let p = map_roots(prog, &mut |e, _| simplify_expr(e, &mut report));
    (p, report)
}

fn lit_bool(e: &Expr) -> Option<bool> {
    match e.kind {
        ExprKind::Lit(Value::Bool(b)) => Some(b),
        _ => None,
    }
}

pub fn simplify_expr(e: &Expr, report: &mut TransformReport) -> Expr {
    rewrite(e, &mut |node| {
        let span = node.span;
        match node.kind {
            ExprKind::Default {
                exceptions,
                just,
                cons,
            } if exceptions.is_empty() && lit_bool(&just).is_some() => {
                report.defaults_simplified += 1;
                if lit_bool(&just) == Some(true) {
                    *cons
                } else {
                    Expr::new(ExprKind::Lit(Value::Empty), span)
                }
            }
            ExprKind::If(c, t, f) if lit_bool(&c).is_some() => {
                report.booleans_folded += 1;
                if lit_bool(&c) == Some(true) {
                    *t
                } else {
                    *f
                }
            }
            ExprKind::Unary(UnOp::Not, x) if lit_bool(&x).is_some() => {
                report.booleans_folded += 1;
                Expr::new(
                    ExprKind::Lit(Value::Bool(!lit_bool(&x).unwrap_or(false))),
                    span,
                )
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let unit = op == BinOp::And;
                match (lit_bool(&l), lit_bool(&r)) {
                    (Some(a), Some(b)) => {
                        report.booleans_folded += 1;
                        let v = if unit { a && b } else { a || b };
                        Expr::new(ExprKind::Lit(Value::Bool(v)), span)
                    }
                    (Some(a), None) if a == unit => {
                        report.booleans_folded += 1;
                        *r
                    }
                    (None, Some(b)) if b == unit => {
                        report.booleans_folded += 1;
                        *l
                    }
                    _ => Expr::new(ExprKind::Binary(op, l, r), span),
                }
            }
            ExprKind::Binary(op, l, r) if op.is_comparison() => match (&l.kind, &r.kind) {
                (ExprKind::Lit(a), ExprKind::Lit(b)) if !a.is_abnormal() && !b.is_abnormal() => {
                    let v = eval_binop(op, a, b);
                    if let Value::Bool(_) = v {
                        report.booleans_folded += 1;
                        Expr::new(ExprKind::Lit(v), span)
                    } else {
                        Expr::new(ExprKind::Binary(op, l, r), span)
                    }
                }
                _ => Expr::new(ExprKind::Binary(op, l, r), span),
            },
            kind => Expr::new(kind, span),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{run_scope, Env, Mode};
    use crate::parser::parse;

    const GEO: &str =
        "enum Region { North, South, East, West, Center, Coast, Hills, Lakes, Islands }
        scope Geo { input r: Region;
          def overseas: bool = match r {
            North => false, South => false, East => false, West => false,
            Center => false, Coast => true, Hills => false, Lakes => false, Islands => true };
          output overseas; }";

    #[test]
    fn nine_variant_match_folds_to_two_arms() {
        let p = parse(GEO).unwrap();
        let (q, r) = apply(
            &p,
            Selection {
                folding: true,
                ..Default::default()
            },
        );
        assert_eq!(r.arms_folded, 7);
        let ExprKind::Match(_, arms) = &q.scopes[0].bindings[0].expr.kind else {
            panic!()
        };
        assert_eq!(arms.len(), 2);
        assert_eq!(arms[1].pattern, Pattern::Wildcard);
        for v in p.enums[0].variant_names() {
            let env: Env = [(
                "r".to_string(),
                Value::Enum {
                    ty: "Region".into(),
                    variant: v,
                    payload: None,
                },
            )]
            .into_iter()
            .collect();
            assert_eq!(
                run_scope(&p, "Geo", &env, Mode::Eager).unwrap(),
                run_scope(&q, "Geo", &env, Mode::Eager).unwrap()
            );
        }
        let (q2, r2) = apply(
            &q,
            Selection {
                folding: true,
                ..Default::default()
            },
        );
        assert!(r2.is_zero());
        assert_eq!(q2, q);
    }

    #[test]
    fn distinct_bodies_unchanged_and_total_fold() {
        let src = "enum C { R, G, B }
            scope S { input c: C;
              def a: int = match c { R => 1, G => 2, B => 3 };
              def b: int = match c { R => 1, G => 1, B => 1 };
              output a, b; }";
        let p = parse(src).unwrap();
        let (q, n) = fold_match_cases(&p, &p.scopes[0].bindings[0].expr);
        assert_eq!(n, 0);
        assert_eq!(q, p.scopes[0].bindings[0].expr);
        let (q, n) = fold_match_cases(&p, &p.scopes[0].bindings[1].expr);
        assert_eq!(n, 2);
        let ExprKind::Match(_, arms) = &q.kind else {
            panic!()
        };
        assert_eq!(arms.len(), 1);
        assert_eq!(arms[0].pattern, Pattern::Wildcard);
    }

    #[test]
    fn used_binders_block_folding() {
        let src = "enum Z { A(int), B(int) }
            scope S { input z: Z;
              def y: int = match z { A v => v, B v => v };
              def w: int = match z { A v => 0, B u => 0 };
              output y, w; }";
        let p = parse(src).unwrap();
        assert_eq!(fold_match_cases(&p, &p.scopes[0].bindings[0].expr).1, 0);
        assert_eq!(fold_match_cases(&p, &p.scopes[0].bindings[1].expr).1, 1);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Expr::let_("x", Expr::int(1), Expr::var("x"));
        let b = Expr::let_("y", Expr::int(1), Expr::var("y"));
        let c = Expr::let_("y", Expr::int(1), Expr::var("x"));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn reorder_groups_by_inputs() {
        let src = "scope S { input a: bool; input b: bool;
            def y: int = default < rule (a :- 1), rule (b :- 2), rule (a :- 3) > (true :- 0);
            output y; }";
        let p = parse(src).unwrap();
        let (q, r) = apply(
            &p,
            Selection {
                reorder: true,
                ..Default::default()
            },
        );
        assert_eq!(r.exceptions_regrouped, 1);
        let ExprKind::Default { exceptions, .. } = &q.scopes[0].bindings[0].expr.kind else {
            panic!()
        };
        let conses: Vec<String> = exceptions
            .iter()
            .map(|x| match &x.kind {
                ExprKind::Default { cons, .. } => crate::parser::print_expr(cons),
                _ => String::new(),
            })
            .collect();
        assert_eq!(conses, vec!["1", "3", "2"]);
        let tax = parse(
            "scope T { input income: money; input n: int;
              def r: rate = default < rule (income <= $10,000 :- 0%), rule (n >= 3 :- 15%) > (true :- 20%);
              output r; }",
        )
        .unwrap();
        let (q, r) = apply(
            &tax,
            Selection {
                reorder: true,
                ..Default::default()
            },
        );
        assert_eq!(r.exceptions_regrouped, 0);
        assert_eq!(q, tax);
    }

    #[test]
    fn frontend_simplification() {
        let e = Expr::default(vec![], Expr::bool(true), Expr::int(42));
        let mut r = TransformReport::default();
        assert_eq!(simplify_expr(&e, &mut r), Expr::int(42));
        let e = Expr::if_(Expr::bool(true), Expr::var("a"), Expr::var("b"));
        assert_eq!(simplify_expr(&e, &mut r), Expr::var("a"));
        let e = Expr::default(
            vec![Expr::rule(Expr::bool(true), Expr::int(1))],
            Expr::bool(true),
            Expr::int(2),
        );
        let s = simplify_expr(&e, &mut r);
        let ExprKind::Default { exceptions, .. } = &s.kind else {
            panic!()
        };
        // the exception itself is a trivial default and simplifies to 1
        assert_eq!(exceptions[0], Expr::int(1));
        let e = Expr::default(vec![], Expr::bool(false), Expr::int(2));
        assert_eq!(simplify_expr(&e, &mut r), Expr::lit(Value::Empty));
    }
}
