//! Mutation campaigns: generate mutants, keep those whose fault shows up on
//! a brute-force input grid, and check that exploration finds each of them.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mutate::{mutate, MutationKind, MutationOp};
use crate::ast::{ExprKind, Program, Scope, Span};
use crate::explorer::{explore, Config, Opts, TestSuite};
use crate::interp::{run_scope, Env, Mode, Outcome};
use crate::value::{SemType, Value};

/// Largest number of grid points screened per mutant.
pub const GRID_LIMIT: usize = 4096;

#[derive(Clone)]
pub struct CampaignConfig {
    pub scope: String,
    pub count: usize,
    pub kinds: Vec<MutationKind>,
    pub seed: u64,
    /// Wall-clock budget of one exploration.
    pub budget: Duration,
    /// Exploration settings; the timeout is replaced by `budget`.
    pub explore: Config,
    /// Mutants generated at most, reachable or not.
    pub max_attempts: usize,
}

impl CampaignConfig {
    pub fn new(scope: &str, count: usize, seed: u64) -> CampaignConfig {
        CampaignConfig {
            scope: scope.to_string(),
            count,
            kinds: MutationKind::ALL.to_vec(),
            seed,
            budget: Duration::from_secs(5),
            explore: Config::with_opts(Opts::all()),
            max_attempts: 50 * count.max(1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MutantReport {
    pub seed: u64,
    pub op: MutationOp,
    pub target: Span,
    pub found: bool,
    /// Exploration stopped on the budget before completing.
    pub budget_exceeded: bool,
    /// Input of the first testcase exposing the fault.
    pub witness: Option<Env>,
    pub witness_outcome: Option<Outcome>,
    /// Run index of the witness.
    pub found_at_iter: Option<u64>,
    pub tests: usize,
    pub elapsed: Duration,
    pub program: Program,
    pub suite: Option<TestSuite>,
}

#[derive(Clone, Debug, Default)]
pub struct CampaignReport {
    pub mutants: Vec<MutantReport>,
    /// Mutants generated but discarded because no grid input exposes them.
    pub screened_out: usize,
    pub attempts: usize,
}

/// Seed, operation, target, found, witness and iteration of one mutant.
pub type MutantOutcome = (u64, MutationOp, Span, bool, Option<Env>, Option<u64>);

impl CampaignReport {
    pub fn found(&self) -> usize {
        self.mutants.iter().filter(|m| m.found).count()
    }

    /// Everything but timings, for comparing runs.
    pub fn outcomes(&self) -> Vec<MutantOutcome> {
        self.mutants
            .iter()
            .map(|m| {
                (
                    m.seed,
                    m.op,
                    m.target,
                    m.found,
                    m.witness.clone(),
                    m.found_at_iter,
                )
            })
            .collect()
    }
}

impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.mutants.iter().enumerate() {
            let status = match (m.found, m.budget_exceeded) {
                (true, _) => format!("found at iter {}", m.found_at_iter.unwrap_or(0)),
                (false, true) => "missed (budget)".to_string(),
                (false, false) => "missed".to_string(),
            };
            writeln!(
                f,
                "mutant {:>3} {:<10} at {}: {status}, {} tests, {:.3}s",
                i + 1,
                m.op.to_string(),
                m.target,
                m.tests,
                m.elapsed.as_secs_f64()
            )?;
        }
        write!(
            f,
            "found {}/{} (screened out {})",
            self.found(),
            self.mutants.len(),
            self.screened_out
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error("no mutation kinds selected")]
    NoKinds,
}

/// Numeric literals of the program, for building grids near thresholds.
fn literals(prog: &Program) -> (BTreeSet<BigInt>, BTreeSet<BigInt>, BTreeSet<BigRational>) {
    let mut ints = BTreeSet::new();
    let mut cents = BTreeSet::new();
    let mut rats = BTreeSet::new();
    for r in prog.roots() {
        r.walk(&mut |e| match &e.kind {
            ExprKind::Lit(Value::Int(n)) => {
                ints.insert(n.clone());
            }
            ExprKind::Lit(Value::Money(c)) => {
                cents.insert(c.clone());
            }
            ExprKind::Lit(Value::Rat(q)) => {
                rats.insert(q.clone());
            }
            _ => {}
        });
    }
    (ints, cents, rats)
}

fn around<T: Ord + Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T>>(
    consts: &BTreeSet<T>,
    zero: T,
    one: T,
) -> Vec<T> {
    let mut out = BTreeSet::new();
    out.insert(zero);
    for c in consts {
        out.insert(c.clone() - one.clone());
        out.insert(c.clone());
        out.insert(c.clone() + one.clone());
    }
    out.into_iter().collect()
}

fn domain(prog: &Program, ty: &SemType, lits: &(Vec<Value>, Vec<Value>, Vec<Value>)) -> Vec<Value> {
    match ty {
        SemType::Bool => vec![Value::Bool(false), Value::Bool(true)],
        SemType::Int => lits.0.clone(),
        SemType::Money => lits.1.clone(),
        SemType::Rat => lits.2.clone(),
        SemType::Enum(n) => {
            let d = prog.enum_decl(n).expect("validated enum");
            d.variants
                .iter()
                .flat_map(|v| {
                    let payloads = match &v.payload {
                        Some(t) => domain(prog, t, lits)
                            .into_iter()
                            .map(|p| Some(Box::new(p)))
                            .collect(),
                        None => vec![None],
                    };
                    payloads.into_iter().map(|payload| Value::Enum {
                        ty: n.clone(),
                        variant: v.name.clone(),
                        payload,
                    })
                })
                .collect()
        }
        SemType::Struct(n) => {
            let d = prog.struct_decl(n).expect("validated struct");
            let mut rows: Vec<Vec<(String, Value)>> = vec![Vec::new()];
            for (f, t) in &d.fields {
                let dom = domain(prog, t, lits);
                rows = rows
                    .into_iter()
                    .flat_map(|r| {
                        dom.iter().map(move |v| {
                            let mut r = r.clone();
                            r.push((f.clone(), v.clone()));
                            r
                        })
                    })
                    .collect();
            }
            rows.into_iter()
                .map(|fields| Value::Struct {
                    ty: n.clone(),
                    fields,
                })
                .collect()
        }
        SemType::Func(..) => Vec::new(),
    }
}

/// Keeps every other value of the largest domain until the product fits.
fn thin(mut doms: Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    let size = |d: &[Vec<Value>]| {
        d.iter()
            .try_fold(1usize, |acc, x| acc.checked_mul(x.len().max(1)))
    };
    while size(&doms).is_none_or(|n| n > GRID_LIMIT) {
        let Some(big) = (0..doms.len()).max_by_key(|&i| doms[i].len()) else {
            break;
        };
        if doms[big].len() <= 1 {
            break;
        }
        doms[big] = doms[big].iter().step_by(2).cloned().collect();
    }
    doms
}

/// Input grid of a scope: values at and next to every literal of the
/// program, all booleans and all variants.
pub fn input_grid(prog: &Program, scope: &Scope) -> Vec<Env> {
    let (ints, cents, rats) = literals(prog);
    let lits = (
        around(&ints, BigInt::from(0), BigInt::one())
            .into_iter()
            .map(Value::Int)
            .collect(),
        around(&cents, BigInt::from(0), BigInt::one())
            .into_iter()
            .map(Value::Money)
            .collect(),
        around(
            &rats,
            BigRational::from_integer(0.into()),
            BigRational::one(),
        )
        .into_iter()
        .map(Value::Rat)
        .collect(),
    );
    let doms = thin(
        scope
            .inputs
            .iter()
            .map(|(_, t)| domain(prog, t, &lits))
            .collect(),
    );
    let mut envs = vec![Env::new()];
    for ((name, _), dom) in scope.inputs.iter().zip(&doms) {
        envs = envs
            .into_iter()
            .flat_map(|e| {
                dom.iter().map(move |v| {
                    let mut e = e.clone();
                    e.insert(name.clone(), v.clone());
                    e
                })
            })
            .collect();
    }
    envs
}

/// Whether the mutant yields empty or conflict where the base program does
/// not give the same result.
pub fn exposes(
    base: &Program,
    mutant: &Program,
    scope: &str,
    env: &Env,
    outcome: &Outcome,
) -> bool {
    outcome.is_abnormal()
        && run_scope(base, scope, env, Mode::Eager).as_ref() != Ok(outcome)
        && run_scope(mutant, scope, env, Mode::Eager).as_ref() == Ok(outcome)
}

fn reachable(base: &Program, mutant: &Program, scope: &str, grid: &[Env]) -> bool {
    grid.iter()
        .any(|env| match run_scope(mutant, scope, env, Mode::Eager) {
            Ok(o) => exposes(base, mutant, scope, env, &o),
            Err(_) => false,
        })
}

/// Generates mutants until `count` of them are reachable on the input grid,
/// then explores each one.
pub fn mutation_campaign(
    prog: &Program,
    cfg: &CampaignConfig,
) -> Result<CampaignReport, CampaignError> {
    let scope = prog
        .scope(&cfg.scope)
        .ok_or_else(|| CampaignError::UnknownScope(cfg.scope.clone()))?;
    if cfg.kinds.is_empty() {
        return Err(CampaignError::NoKinds);
    }
    let grid = input_grid(prog, scope);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = CampaignReport::default();
    let mut chosen: Vec<Program> = Vec::new();
    let mut explore_cfg = cfg.explore.clone();
    explore_cfg.timeout = Some(cfg.budget);
    while report.mutants.len() < cfg.count && report.attempts < cfg.max_attempts {
        report.attempts += 1;
        let kind = cfg.kinds[rng.gen_range(0..cfg.kinds.len())];
        let op = kind.instantiate(&mut rng);
        let seed: u64 = rng.gen();
        let Ok(m) = mutate(prog, op, seed) else {
            continue;
        };
        if m.program == *prog || chosen.contains(&m.program) {
            continue;
        }
        if !reachable(prog, &m.program, &cfg.scope, &grid) {
            report.screened_out += 1;
            continue;
        }
        chosen.push(m.program.clone());
        let start = Instant::now();
        let suite = explore(&m.program, &cfg.scope, &explore_cfg);
        let elapsed = start.elapsed();
        let mut r = MutantReport {
            seed,
            op,
            target: m.target,
            found: false,
            budget_exceeded: false,
            witness: None,
            witness_outcome: None,
            found_at_iter: None,
            tests: 0,
            elapsed,
            program: m.program.clone(),
            suite: None,
        };
        if let Ok(suite) = suite {
            r.budget_exceeded = !suite.complete;
            r.tests = suite.tests.len();
            if let Some(t) = suite
                .tests
                .iter()
                .find(|t| exposes(prog, &m.program, &cfg.scope, &t.inputs, &t.outcome))
            {
                r.found = true;
                r.witness = Some(t.inputs.clone());
                r.witness_outcome = Some(t.outcome.clone());
                r.found_at_iter = Some(t.iter);
            }
            r.suite = Some(suite);
        }
        log::info!(
            "mutant {} {}: found={}",
            report.mutants.len() + 1,
            op,
            r.found
        );
        report.mutants.push(r);
    }
    Ok(report)
}
