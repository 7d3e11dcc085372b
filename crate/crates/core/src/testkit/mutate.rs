//! Fault injection on default terms.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Expr, ExprKind, Program, Span, UnOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MutationOp {
    /// Delete this many exceptions (all of them if fewer exist).
    RemoveExceptions(usize),
    /// Insert a copy of one exception next to it.
    DuplicateException,
    /// Wrap the justification in `not`.
    NegateJustification,
}

impl fmt::Display for MutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationOp::RemoveExceptions(k) => write!(f, "remove({k})"),
            MutationOp::DuplicateException => f.write_str("duplicate"),
            MutationOp::NegateJustification => f.write_str("negate"),
        }
    }
}

/// Mutation families as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MutationKind {
    Remove,
    Duplicate,
    Negate,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [
        MutationKind::Remove,
        MutationKind::Duplicate,
        MutationKind::Negate,
    ];

    /// Picks a concrete operation; removals take one or two exceptions.
    pub fn instantiate(self, rng: &mut impl Rng) -> MutationOp {
        match self {
            MutationKind::Remove => MutationOp::RemoveExceptions(rng.gen_range(1..=2)),
            MutationKind::Duplicate => MutationOp::DuplicateException,
            MutationKind::Negate => MutationOp::NegateJustification,
        }
    }

    /// Parses a comma-separated list such as `remove,duplicate`.
    pub fn parse_list(s: &str) -> Result<Vec<MutationKind>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for MutationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<MutationKind, String> {
        match s {
            "remove" => Ok(MutationKind::Remove),
            "duplicate" => Ok(MutationKind::Duplicate),
            "negate" => Ok(MutationKind::Negate),
            _ => Err(format!(
                "unknown mutation `{s}` (expected remove, duplicate or negate)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutant {
    pub program: Program,
    pub op: MutationOp,
    /// Span of the mutated default term in the base program.
    pub target: Span,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MutateError {
    #[error("no default term is eligible for {0}")]
    NoEligibleDefaultTerm(MutationOp),
}

fn eligible(op: MutationOp, e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Default { exceptions, .. } => {
            matches!(op, MutationOp::NegateJustification) || !exceptions.is_empty()
        }
        _ => false,
    }
}

fn nth_mut<'a>(e: &'a mut Expr, n: &mut usize, op: MutationOp) -> Option<&'a mut Expr> {
    if eligible(op, e) {
        if *n == 0 {
            return Some(e);
        }
        *n -= 1;
    }
    for c in e.children_mut() {
        if let Some(x) = nth_mut(c, n, op) {
            return Some(x);
        }
    }
    None
}

/// Applies `op` to a default term chosen uniformly among the eligible ones
/// of the program. The result depends only on the program, `op` and `seed`.
pub fn mutate(prog: &Program, op: MutationOp, seed: u64) -> Result<Mutant, MutateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for r in prog.roots() {
        r.walk(&mut |e| {
            if eligible(op, e) {
                count += 1;
            }
        });
    }
    if count == 0 {
        return Err(MutateError::NoEligibleDefaultTerm(op));
    }
    let mut pick = rng.gen_range(0..count);
    let mut program = prog.clone();
    let target = program
        .roots_mut()
        .into_iter()
        .find_map(|r| nth_mut(r, &mut pick, op))
        .expect("counted above");
    let span = target.span;
    let ExprKind::Default {
        exceptions, just, ..
    } = &mut target.kind
    else {
        unreachable!("eligible terms are defaults")
    };
    match op {
        MutationOp::RemoveExceptions(k) => {
            let n = exceptions.len();
            let mut drop: Vec<usize> = sample(&mut rng, n, k.clamp(1, n)).into_vec();
            drop.sort_unstable_by(|a, b| b.cmp(a));
            for i in drop {
                exceptions.remove(i);
            }
        }
        MutationOp::DuplicateException => {
            let i = rng.gen_range(0..exceptions.len());
            let copy = exceptions[i].clone();
            exceptions.insert(i + 1, copy);
        }
        MutationOp::NegateJustification => {
            let j = std::mem::replace(just.as_mut(), Expr::bool(true));
            let s = j.span;
            **just = Expr::new(ExprKind::Unary(UnOp::Not, Box::new(j)), s);
        }
    }
    Ok(Mutant {
        program,
        op,
        target: span,
        seed,
    })
}
