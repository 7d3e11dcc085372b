//! Canonical printer. Output re-parses to a structurally equal program.

use std::fmt::Write;

use crate::ast::*;
use crate::value::{format_money, SemType, Value};

/// Context level for operands of prefix operators, postfix access and
/// exception lists: anything looser must be parenthesized.
const TIGHT: u8 = 6;

pub fn print_type(t: &SemType) -> String {
    t.to_string()
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for e in &p.enums {
        let _ = writeln!(out, "enum {} {{", e.name);
        for v in &e.variants {
            match &v.payload {
                Some(t) => {
                    let _ = writeln!(out, "  {}({}),", v.name, print_type(t));
                }
                None => {
                    let _ = writeln!(out, "  {},", v.name);
                }
            }
        }
        out.push_str("}\n\n");
    }
    for s in &p.structs {
        let _ = writeln!(out, "struct {} {{", s.name);
        for (f, t) in &s.fields {
            let _ = writeln!(out, "  {f}: {},", print_type(t));
        }
        out.push_str("}\n\n");
    }
    for f in &p.functions {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|(n, t)| format!("{n}: {}", print_type(t)))
            .collect();
        let _ = writeln!(
            out,
            "fn {}({}) -> {} {{\n  {}\n}}\n",
            f.name,
            params.join(", "),
            print_type(&f.ret),
            print_expr(&f.body)
        );
    }
    for s in &p.scopes {
        let _ = writeln!(out, "scope {} {{", s.name);
        for (n, t) in &s.inputs {
            let _ = writeln!(out, "  input {n}: {};", print_type(t));
        }
        for a in &s.assertions {
            let _ = writeln!(out, "  assert {};", print_expr(a));
        }
        for b in &s.bindings {
            let _ = writeln!(
                out,
                "  def {}: {} = {};",
                b.name,
                print_type(&b.ty),
                print_expr(&b.expr)
            );
        }
        for o in &s.outputs {
            let _ = writeln!(out, "  output {o};");
        }
        out.push_str("}\n\n");
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

fn lit(out: &mut String, v: &Value) {
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Rat(q) => {
            let _ = write!(out, "{}/{}", q.numer(), q.denom());
        }
        Value::Money(c) => out.push_str(&format_money(c)),
        Value::Enum {
            ty,
            variant,
            payload,
        } => {
            let _ = write!(out, "{ty}::{variant}");
            if let Some(p) = payload {
                out.push('(');
                lit(out, p);
                out.push(')');
            }
        }
        Value::Struct { ty, fields } => {
            let _ = write!(out, "{ty} {{ ");
            for (i, (f, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{f}: ");
                lit(out, v);
            }
            out.push_str(" }");
        }
        Value::Empty => out.push_str("empty"),
        Value::Conflict => out.push_str("conflict"),
    }
}

fn contains_struct_make(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if matches!(n.kind, ExprKind::StructMake(..))
            || matches!(&n.kind, ExprKind::Lit(Value::Struct { .. }))
        {
            found = true;
        }
    });
    found
}

fn list(out: &mut String, items: &[Expr], level: u8) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a, level);
    }
}

fn expr(out: &mut String, e: &Expr, ctx: u8) {
    match &e.kind {
        ExprKind::Var(n) => out.push_str(n),
        ExprKind::Lit(v) => lit(out, v),
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < ctx;
            if paren {
                out.push('(');
            }
            expr(out, l, p);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, r, p + 1);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Unary(UnOp::Not, x) => {
            out.push_str("not ");
            expr(out, x, TIGHT);
        }
        ExprKind::Unary(UnOp::Neg, x) => {
            out.push('-');
            if matches!(x.kind, ExprKind::Lit(_)) {
                out.push('(');
                expr(out, x, 0);
                out.push(')');
            } else {
                expr(out, x, TIGHT);
            }
        }
        ExprKind::Unary(op @ (UnOp::Round | UnOp::Floor), x) => {
            out.push_str(if *op == UnOp::Round {
                "round("
            } else {
                "floor("
            });
            expr(out, x, 0);
            out.push(')');
        }
        ExprKind::If(c, t, f) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            out.push_str("if ");
            expr(out, c, 0);
            out.push_str(" then ");
            expr(out, t, 0);
            out.push_str(" else ");
            expr(out, f, 0);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Let(x, b, body) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            let _ = write!(out, "let {x} = ");
            expr(out, b, 0);
            out.push_str(" in ");
            expr(out, body, 0);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Assert(c, body) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            out.push_str("assert ");
            expr(out, c, 0);
            out.push_str(" in ");
            expr(out, body, 0);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Match(s, arms) => {
            out.push_str("match ");
            if contains_struct_make(s) {
                out.push('(');
                expr(out, s, 0);
                out.push(')');
            } else {
                expr(out, s, 0);
            }
            out.push_str(" { ");
            for (i, arm) in arms.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match &arm.pattern {
                    Pattern::Wildcard => out.push('_'),
                    Pattern::Variants { names, binder } => {
                        out.push_str(&names.join(" | "));
                        if let Some(b) = binder {
                            let _ = write!(out, " {b}");
                        }
                    }
                }
                out.push_str(" => ");
                expr(out, &arm.body, 0);
            }
            out.push_str(" }");
        }
        ExprKind::StructMake(name, fields) => {
            let _ = write!(out, "{name} {{ ");
            for (i, (f, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{f}: ");
                expr(out, v, 0);
            }
            out.push_str(" }");
        }
        ExprKind::FieldGet(x, f) => {
            expr(out, x, TIGHT);
            let _ = write!(out, ".{f}");
        }
        ExprKind::EnumMake(ty, v, p) => {
            let _ = write!(out, "{ty}::{v}");
            if let Some(p) = p {
                out.push('(');
                expr(out, p, 0);
                out.push(')');
            }
        }
        ExprKind::Call(f, args) => {
            let _ = write!(out, "{f}(");
            list(out, args, 0);
            out.push(')');
        }
        ExprKind::Opaque(tag, args) => {
            let _ = write!(out, "@{tag}(");
            list(out, args, 0);
            out.push(')');
        }
        ExprKind::Default {
            exceptions,
            just,
            cons,
        } => {
            out.push_str("default <");
            list(out, exceptions, TIGHT);
            out.push_str("> (");
            expr(out, just, 0);
            out.push_str(" :- ");
            expr(out, cons, 0);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn canonical_default() {
        assert_eq!(
            print_expr(&Expr::rule(Expr::bool(true), Expr::int(1))),
            "default <> (true :- 1)"
        );
    }

    #[test]
    fn parenthesization() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::var("a"), Expr::var("b")),
            Expr::var("c"),
        );
        assert_eq!(print_expr(&e), "(a + b) * c");
        let e = Expr::binary(
            BinOp::Sub,
            Expr::var("a"),
            Expr::binary(BinOp::Sub, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(print_expr(&e), "a - (b - c)");
        let neg = Expr::synth(ExprKind::Unary(UnOp::Neg, Box::new(Expr::int(5))));
        assert_eq!(print_expr(&neg), "-(5)");
        assert_eq!(print_expr(&Expr::int(-5)), "-5");
    }

    #[test]
    fn round_trip_small_program() {
        let src = "enum G { A, B, C(int) }
            scope S {
              input g: G;
              input x: rat;
              assert x >= -3/2;
              def y: money = if not (x == 0) then $1,234.56 * x else -$0.05;
              def z: int = match g { A | B => 1, C n => n + round(x) };
              output y;
              output z;
            }";
        let p = parse(src).unwrap();
        let printed = print_program(&p);
        let q = parse(&printed).unwrap_or_else(|d| panic!("{printed}\n{d:?}"));
        assert_eq!(p, q);
        assert_eq!(print_program(&q), printed);
    }
}
