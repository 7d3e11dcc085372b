//! Random programs shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use defcalc::ast::{Expr, ExprKind, Program};
use defcalc::interp::{run_scope, Env, Mode, Outcome, RunError};
use defcalc::parser::parse;
use defcalc::validate::validate;
use defcalc::value::Value;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn program_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("programs")
        .join(name)
}

pub fn load(name: &str) -> Program {
    let text = std::fs::read_to_string(program_path(name)).expect("bundled program");
    let prog = parse(&text).expect("bundled program parses");
    let errs = validate(&prog);
    assert!(errs.is_empty(), "{name}: {errs:?}");
    prog
}

fn bool_atom(rng: &mut impl Rng) -> Expr {
    let c = Expr::int(rng.gen_range(-3..=3));
    match rng.gen_range(0..8) {
        0 => Expr::var("a"),
        1 => Expr::binary(defcalc::ast::BinOp::And, Expr::var("a"), Expr::var("b")),
        2 => Expr::binary(
            defcalc::ast::BinOp::And,
            Expr::not(Expr::var("a")),
            Expr::var("b"),
        ),
        3 => Expr::binary(defcalc::ast::BinOp::Gt, Expr::var("x"), c),
        4 => Expr::binary(defcalc::ast::BinOp::Eq, Expr::var("x"), c),
        5 => Expr::binary(defcalc::ast::BinOp::Le, Expr::var("y"), c),
        6 => Expr::bool(rng.gen_bool(0.3)),
        _ => Expr::binary(
            defcalc::ast::BinOp::And,
            Expr::var("b"),
            Expr::binary(defcalc::ast::BinOp::Lt, Expr::var("x"), c),
        ),
    }
}

fn int_atom(rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::var("x"),
        1 => Expr::binary(
            defcalc::ast::BinOp::Add,
            Expr::var("y"),
            Expr::int(rng.gen_range(-2..=2)),
        ),
        _ => Expr::int(rng.gen_range(-5..=5)),
    }
}

/// A default term over `a, b: bool` and `x, y: int` with at most `depth`
/// levels of nesting and four exceptions per level.
pub fn default_term(rng: &mut impl Rng, depth: u32) -> Expr {
    let n = if depth == 0 { 0 } else { rng.gen_range(0..=4) };
    let exceptions = (0..n).map(|_| default_term(rng, depth - 1)).collect();
    Expr::default(exceptions, bool_atom(rng), int_atom(rng))
}

pub fn term_env(rng: &mut impl Rng) -> Env {
    [
        ("a".to_string(), Value::Bool(rng.gen())),
        ("b".to_string(), Value::Bool(rng.gen())),
        ("x".to_string(), Value::int(rng.gen_range(-4..=4))),
        ("y".to_string(), Value::int(rng.gen_range(-4..=4))),
    ]
    .into_iter()
    .collect()
}

/// Shuffles the exceptions of every default node.
pub fn permute(e: &Expr, rng: &mut impl Rng) -> Expr {
    let mut out = e.clone();
    for c in out.children_mut() {
        *c = permute(c, rng);
    }
    if let ExprKind::Default { exceptions, .. } = &mut out.kind {
        exceptions.shuffle(rng);
    }
    out
}

/// A random scope over finite inputs: up to two booleans, one enumeration
/// of one to four variants and an integer asserted into [-8, 8]. With
/// `literal_cons` every consequence is a constant, so outputs are fixed
/// along a path.
pub struct RandomScope {
    pub source: String,
    pub bools: usize,
    pub variants: usize,
}

fn just_src(rng: &mut impl Rng, s: &RandomScope, earlier: bool) -> String {
    let c = rng.gen_range(-9..=9);
    let pick = rng.gen_range(0..9);
    match pick {
        0 | 1 if s.bools > 0 => {
            let b = rng.gen_range(0..s.bools);
            if pick == 0 {
                format!("b{b}")
            } else {
                format!("not b{b}")
            }
        }
        2 => format!("x > {c}"),
        3 => format!("x == {c}"),
        4 => format!("x <= {c}"),
        5 => {
            let v = rng.gen_range(0..s.variants);
            format!("match e {{ V{v} => true, _ => false }}")
        }
        6 if s.bools > 0 => format!("b0 && x >= {c}"),
        7 if earlier => format!("d0 > {}", rng.gen_range(-3..=3)),
        8 => "true".to_string(),
        _ => format!("x + x != {}", 2 * c),
    }
}

fn cons_src(rng: &mut impl Rng, s: &RandomScope, literal: bool, earlier: bool) -> String {
    match rng.gen_range(0..6) {
        0 if !literal => "x + 1".to_string(),
        1 if earlier => format!("d0 + {}", rng.gen_range(0..=2)),
        2 if !literal => "if x > 0 then x else 0 - x".to_string(),
        3 => {
            let arms: Vec<String> = (0..s.variants)
                .map(|v| format!("V{v} => {}", rng.gen_range(1..=2)))
                .collect();
            format!("match e {{ {} }}", arms.join(", "))
        }
        _ => rng.gen_range(-3..=6).to_string(),
    }
}

fn default_src(
    rng: &mut impl Rng,
    s: &RandomScope,
    depth: u32,
    literal: bool,
    earlier: bool,
) -> String {
    let n = if depth == 0 { 0 } else { rng.gen_range(0..=3) };
    let ex: Vec<String> = (0..n)
        .map(|_| default_src(rng, s, depth - 1, literal, earlier))
        .collect();
    format!(
        "default <{}> ({} :- {})",
        ex.join(", "),
        just_src(rng, s, earlier),
        cons_src(rng, s, literal, earlier)
    )
}

pub fn random_scope(rng: &mut impl Rng, literal_cons: bool) -> RandomScope {
    let mut s = RandomScope {
        source: String::new(),
        bools: rng.gen_range(0..=2),
        variants: rng.gen_range(1..=4),
    };
    let variants: Vec<String> = (0..s.variants).map(|i| format!("V{i}")).collect();
    let mut src = format!("enum E {{ {} }}\nscope R {{\n", variants.join(", "));
    for b in 0..s.bools {
        src.push_str(&format!("  input b{b}: bool;\n"));
    }
    src.push_str("  input e: E;\n  input x: int;\n  assert x >= -8 && x <= 8;\n");
    let d0 = default_src(rng, &s, 2, literal_cons, false);
    src.push_str(&format!("  def d0: int = {d0};\n"));
    let two = rng.gen_bool(0.5);
    if two {
        let d1 = default_src(rng, &s, 1, literal_cons, true);
        src.push_str(&format!("  def d1: int = {d1};\n  output d0, d1;\n}}\n"));
    } else {
        src.push_str("  output d0;\n}\n");
    }
    s.source = src;
    s
}

/// Every input of a random scope, with `x` ranging over `xs`.
pub fn all_inputs(s: &RandomScope, xs: std::ops::RangeInclusive<i64>) -> Vec<Env> {
    let mut out = Vec::new();
    for bits in 0..(1u32 << s.bools) {
        for v in 0..s.variants {
            for x in xs.clone() {
                let mut env = Env::new();
                for b in 0..s.bools {
                    env.insert(format!("b{b}"), Value::Bool(bits & (1 << b) != 0));
                }
                env.insert(
                    "e".into(),
                    Value::Enum {
                        ty: "E".into(),
                        variant: format!("V{v}"),
                        payload: None,
                    },
                );
                env.insert("x".into(), Value::int(x));
                out.push(env);
            }
        }
    }
    out
}

/// Outcome classes with values, as strings, plus `violation`.
pub fn class(r: &Result<Outcome, RunError>) -> String {
    match r {
        Ok(o) => o.to_string(),
        Err(RunError::PreconditionViolation { .. }) => "violation".to_string(),
        Err(e) => format!("error: {e}"),
    }
}

pub fn brute_force_classes(
    prog: &Program,
    scope: &str,
    inputs: &[Env],
) -> std::collections::BTreeSet<String> {
    inputs
        .iter()
        .map(|env| class(&run_scope(prog, scope, env, Mode::Eager)))
        .collect()
}
