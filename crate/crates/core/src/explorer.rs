//! The concolic driver. Each iteration runs the scope on the current input,
//! merges the new path into the frontier, negates the deepest branch not yet
//! tried and asks the solver for an input reaching the other side.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::ast::Program;
use crate::concolic::{
    flatten_inputs, input_atoms, rebuild_inputs, run_scope_concolic, ConcolicOpts,
};
use crate::interp::{default_value, Env, Mode, Outcome, RunError};
use crate::opaque::OpaqueRegistry;
use crate::solver::simplify::simplify;
use crate::solver::{Backend, CheckResult, Decls, Model, Session, SoftTier};
use crate::symbolic::{path_fingerprint, BranchRecord, Origin, Term};
use crate::transforms::{self, Selection, TransformReport};
use crate::value::SemType;

/// Optimization switches, named as on the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Opts {
    pub lazy: bool,
    pub folding: bool,
    pub trivial: bool,
    pub reorder: bool,
    pub frontend: bool,
    pub early_error: bool,
    pub soft: bool,
}

impl Opts {
    pub const NAMES: [&'static str; 7] = [
        "lazy",
        "folding",
        "trivial",
        "reorder",
        "frontend",
        "early-error",
        "soft",
    ];

    /// `lazy`, `folding`, `trivial`, `reorder` and `frontend`. The
    /// early-error rule and the soft ladder change what is reported and are
    /// requested separately.
    pub fn all() -> Opts {
        Opts {
            lazy: true,
            folding: true,
            trivial: true,
            reorder: true,
            frontend: true,
            early_error: false,
            soft: false,
        }
    }

    pub fn none() -> Opts {
        Opts::default()
    }

    fn flag(&mut self, name: &str) -> Option<&mut bool> {
        Some(match name {
            "lazy" => &mut self.lazy,
            "folding" => &mut self.folding,
            "trivial" => &mut self.trivial,
            "reorder" => &mut self.reorder,
            "frontend" => &mut self.frontend,
            "early-error" => &mut self.early_error,
            "soft" => &mut self.soft,
            _ => return None,
        })
    }

    fn get(&self, name: &str) -> bool {
        let mut o = *self;
        o.flag(name).map(|b| *b).unwrap_or(false)
    }

    fn selection(&self) -> Selection {
        Selection {
            folding: self.folding,
            reorder: self.reorder,
            frontend: self.frontend,
        }
    }
}

impl FromStr for Opts {
    type Err = String;

    /// A comma-separated list of option names, `all` or `none`.
    fn from_str(s: &str) -> Result<Opts, String> {
        let mut o = Opts::none();
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "all" => {
                    let a = Opts::all();
                    o = Opts {
                        early_error: o.early_error,
                        soft: o.soft,
                        ..a
                    }
                }
                "none" => {}
                _ => match o.flag(name) {
                    Some(b) => *b = true,
                    None => {
                        return Err(format!(
                            "unknown optimization `{name}` (expected one of {}, all, none)",
                            Opts::NAMES.join(", ")
                        ))
                    }
                },
            }
        }
        Ok(o)
    }
}

impl fmt::Display for Opts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on: Vec<&str> = Opts::NAMES.into_iter().filter(|n| self.get(n)).collect();
        if on.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&on.join(","))
        }
    }
}

#[derive(Clone)]
pub struct Config {
    pub opts: Opts,
    pub backend: Backend,
    /// Keep one solver session and move along the path with push and pop,
    /// instead of a fresh session per query.
    pub incremental: bool,
    pub max_iters: Option<u64>,
    pub timeout: Option<Duration>,
    /// Initial values for some inputs; the others start at their defaults.
    pub initial: Env,
    pub emit_smtlib: Option<PathBuf>,
    pub opaque: OpaqueRegistry,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            opts: Opts::none(),
            backend: Backend::Builtin,
            incremental: true,
            max_iters: None,
            timeout: None,
            initial: Env::new(),
            emit_smtlib: None,
            opaque: OpaqueRegistry::standard(),
        }
    }
}

impl Config {
    pub fn with_opts(opts: Opts) -> Config {
        Config {
            opts,
            ..Config::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Testcase {
    pub scope: String,
    pub inputs: Env,
    pub outcome: Outcome,
    pub path: Vec<BranchRecord>,
    pub path_fp: String,
    pub soft_tier: Option<SoftTier>,
    /// 1-based index of the run that produced this testcase.
    pub iter: u64,
    /// Solver calls made before this run.
    pub solver_calls: u64,
    /// The hard query whose model is this input; `None` for the initial
    /// input.
    pub query: Option<Vec<Term>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub solver_calls: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
    pub tests: u64,
    pub conflicts: u64,
    pub empties: u64,
    pub iterations: u64,
    /// Runs that did not follow the prefix of the query that produced them.
    pub divergences: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuite {
    pub scope: String,
    pub tests: Vec<Testcase>,
    pub stats: Stats,
    /// False when a budget stopped exploration.
    pub complete: bool,
    /// Solver stack depth (fresh mode: path length) after each run.
    pub depth_trace: Vec<usize>,
    pub transforms: TransformReport,
}

#[derive(Debug, thiserror::Error)]
pub enum ExploreError {
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error("initial input: {0}")]
    Input(RunError),
}

#[derive(Clone, Debug)]
struct Entry {
    rec: BranchRecord,
    negated: bool,
    eligible: bool,
}

/// Where the next query goes: a persistent stack or one session per query.
enum Solving {
    Incremental {
        session: Session,
        stack: Vec<Term>,
    },
    Fresh {
        decls: Decls,
        prefs: Model,
        emitted: usize,
        calls: u64,
    },
}

impl Solving {
    fn calls(&self) -> u64 {
        match self {
            Solving::Incremental { session, .. } => session.calls(),
            Solving::Fresh { calls, .. } => *calls,
        }
    }

    /// Aligns the stack with a new path, one frame per literal.
    fn sync(&mut self, lits: &[Term]) -> usize {
        match self {
            Solving::Incremental { session, stack } => {
                let lcp = stack.iter().zip(lits).take_while(|(a, b)| a == b).count();
                session.pop_to(lcp);
                stack.truncate(lcp);
                for l in &lits[lcp..] {
                    session.push(vec![l.clone()]);
                    stack.push(l.clone());
                }
                session.depth()
            }
            Solving::Fresh { .. } => lits.len(),
        }
    }

    fn solve(
        &mut self,
        backend: &Backend,
        emit: &Option<PathBuf>,
        prefix: &[Term],
        flipped: Term,
        soft_money: Option<&[String]>,
    ) -> (CheckResult, Option<SoftTier>) {
        let go = |s: &mut Session| {
            let r = s.check();
            match (r, soft_money) {
                (CheckResult::Sat(m), Some(money)) => {
                    let (m, tier) = s.check_soft(money, m);
                    (CheckResult::Sat(m), tier)
                }
                (r, _) => (r, None),
            }
        };
        match self {
            Solving::Incremental { session, stack } => {
                session.pop_to(prefix.len());
                stack.truncate(prefix.len());
                session.push(vec![flipped]);
                let r = go(session);
                session.pop().expect("frame pushed above");
                r
            }
            Solving::Fresh {
                decls,
                prefs,
                emitted,
                calls,
            } => {
                let mut s = Session::new(backend.clone(), decls.clone(), prefs.clone());
                if let Some(dir) = emit {
                    s.emit_to(dir.clone(), *emitted);
                }
                let mut lits = prefix.to_vec();
                lits.push(flipped);
                s.push(lits);
                let r = go(&mut s);
                *emitted = s.emitted();
                *calls += s.calls();
                r
            }
        }
    }
}

/// Runs concolic exploration of `scope` and returns one testcase per
/// distinct path. The program is rewritten first according to the enabled
/// optimizations; testcases record inputs and outcomes, which the original
/// program reproduces.
pub fn explore(prog: &Program, scope: &str, config: &Config) -> Result<TestSuite, ExploreError> {
    let start = Instant::now();
    let opts = config.opts;
    let (tp, report) = transforms::apply(prog, opts.selection());
    let sd = tp
        .scope(scope)
        .ok_or_else(|| ExploreError::UnknownScope(scope.to_string()))?;
    let copts = ConcolicOpts {
        mode: if opts.lazy { Mode::Lazy } else { Mode::Eager },
        early_error: opts.early_error,
    };
    let mut input: Env = sd
        .inputs
        .iter()
        .map(|(n, t)| {
            let v = config
                .initial
                .get(n)
                .cloned()
                .unwrap_or_else(|| default_value(&tp, t));
            (n.clone(), v)
        })
        .collect();
    if let Some(extra) = config.initial.keys().find(|k| sd.input_type(k).is_none()) {
        return Err(ExploreError::Input(RunError::UnexpectedInput(
            extra.clone(),
        )));
    }
    let prefs = flatten_inputs(&tp, sd, &input);
    let money: Vec<String> = input_atoms(&tp, sd)
        .into_iter()
        .filter(|a| a.ty == SemType::Money)
        .map(|a| a.name)
        .collect();
    let soft_money = opts.soft.then_some(money.as_slice());
    let decls = Decls::for_scope(&tp, scope);
    let mut solving = if config.incremental {
        let mut session = Session::new(config.backend.clone(), decls, prefs.clone());
        if let Some(dir) = &config.emit_smtlib {
            session.emit_to(dir.clone(), 0);
        }
        Solving::Incremental {
            session,
            stack: Vec::new(),
        }
    } else {
        Solving::Fresh {
            decls,
            prefs,
            emitted: 0,
            calls: 0,
        }
    };

    let mut suite = TestSuite {
        scope: scope.to_string(),
        tests: Vec::new(),
        stats: Stats::default(),
        complete: false,
        depth_trace: Vec::new(),
        transforms: report,
    };
    let mut stats = Stats::default();
    let mut frontier: Vec<Entry> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut issued: BTreeSet<Vec<Term>> = BTreeSet::new();
    // (flipped position, query, tier) of the model being run
    let mut pending: Option<(usize, Vec<Term>, Option<SoftTier>)> = None;
    let out_of_time = |iters: u64| {
        config.max_iters.is_some_and(|m| iters >= m)
            || config.timeout.is_some_and(|t| start.elapsed() >= t)
    };

    'outer: loop {
        if out_of_time(stats.iterations) {
            break;
        }
        stats.iterations += 1;
        let calls_before = solving.calls();
        let run = run_scope_concolic(&tp, &config.opaque, scope, &input, copts);
        if stats.iterations == 1 {
            if let Err(
                e @ (RunError::UnknownScope(_)
                | RunError::MissingInput(_)
                | RunError::UnexpectedInput(_)
                | RunError::InputType { .. }),
            ) = &run.outcome
            {
                return Err(ExploreError::Input(e.clone()));
            }
        }
        frontier = merge(
            &frontier,
            &run.path,
            pending.as_ref().map(|p| p.0),
            &mut stats,
        );
        mark_eligible(&mut frontier, opts.trivial);
        let lits: Vec<Term> = frontier.iter().map(|e| e.rec.literal.clone()).collect();
        suite.depth_trace.push(solving.sync(&lits));

        let (query, tier) = match pending.take() {
            Some((_, q, t)) => (Some(q), t),
            None => (
                None,
                soft_money.and_then(|m| SoftTier::of_model(&flatten_inputs(&tp, sd, &input), m)),
            ),
        };
        match run.outcome {
            Ok(outcome) => {
                let fp = path_fingerprint(&run.path);
                if seen.insert(fp.clone()) {
                    match outcome {
                        Outcome::Empty => stats.empties += 1,
                        Outcome::Conflict(_) => stats.conflicts += 1,
                        Outcome::Value(_) => {}
                    }
                    stats.tests += 1;
                    suite.tests.push(Testcase {
                        scope: scope.to_string(),
                        inputs: input.clone(),
                        outcome,
                        path: run.path,
                        path_fp: fp,
                        soft_tier: tier,
                        iter: stats.iterations,
                        solver_calls: calls_before,
                        query,
                    });
                }
            }
            Err(_) => stats.violations += 1,
        }

        loop {
            let Some(i) = frontier.iter().rposition(|e| e.eligible && !e.negated) else {
                suite.complete = true;
                break 'outer;
            };
            frontier[i].negated = true;
            let flipped = frontier[i].rec.flipped();
            let mut q = lits[..i].to_vec();
            q.push(flipped.clone());
            if !issued.insert(q.clone()) {
                continue;
            }
            if config.timeout.is_some_and(|t| start.elapsed() >= t) {
                break 'outer;
            }
            let (r, tier) = solving.solve(
                &config.backend,
                &config.emit_smtlib,
                &lits[..i],
                flipped,
                soft_money,
            );
            let verdict = match &r {
                CheckResult::Sat(_) => "sat",
                CheckResult::Unsat => "unsat",
                CheckResult::Unknown(_) => "unknown",
            };
            log::info!(
                "iter={} {verdict} depth={} tests={}",
                stats.iterations,
                i + 1,
                stats.tests
            );
            match r {
                CheckResult::Sat(m) => {
                    stats.sat += 1;
                    input = rebuild_inputs(&tp, sd, &m);
                    pending = Some((i, q, tier));
                    break;
                }
                CheckResult::Unsat => stats.unsat += 1,
                CheckResult::Unknown(why) => {
                    let shown: Vec<String> = q.iter().map(|t| t.to_string()).collect();
                    log::warn!("solver gave up on [{}]: {why}", shown.join(", "));
                    stats.unknown += 1;
                }
            }
        }
    }
    stats.solver_calls = solving.calls();
    suite.stats = stats;
    Ok(suite)
}

/// Builds the frontier for a new path. When the run follows the query that
/// produced it, positions before the flipped one keep their flags and the
/// flipped one counts as done. A run leaving that prefix keeps flags only
/// on the common part.
fn merge(
    old: &[Entry],
    path: &[BranchRecord],
    flipped: Option<usize>,
    stats: &mut Stats,
) -> Vec<Entry> {
    let Some(k) = flipped else {
        return path.iter().map(fresh).collect();
    };
    let mut expected: Vec<Entry> = old[..k].to_vec();
    expected.push(Entry {
        rec: {
            let r = &old[k].rec;
            BranchRecord::new(r.cond.clone(), !r.taken, r.origin, r.span)
        },
        negated: true,
        eligible: true,
    });
    let lcp = expected
        .iter()
        .zip(path)
        .take_while(|(a, r)| a.rec.literal == r.literal)
        .count();
    if lcp == k + 1 {
        expected.extend(path[lcp..].iter().map(fresh));
        return expected;
    }
    // The run satisfies the query but took other branches on the way, so
    // the query stays as the prefix and only new literals are appended.
    stats.divergences += 1;
    log::debug!("run left the expected prefix at {lcp} (flipped {k})");
    for r in path {
        if !expected.iter().any(|e| e.rec.literal == r.literal) {
            expected.push(fresh(r));
        }
    }
    expected
}

fn fresh(r: &BranchRecord) -> Entry {
    Entry {
        rec: r.clone(),
        negated: false,
        eligible: true,
    }
}

/// Records that are never negated: satisfied assertions always, and with
/// trivial filtering also constant constraints and literals repeating or
/// contradicting an earlier one.
fn mark_eligible(frontier: &mut [Entry], trivial: bool) {
    let mut earlier: Vec<Term> = Vec::new();
    for e in frontier.iter_mut() {
        let lit = simplify(&e.rec.literal);
        e.eligible = if e.rec.origin == Origin::Assertion && e.rec.taken {
            false
        } else if trivial {
            let neg = simplify(&Term::not(lit.clone()));
            !(e.rec.trivial
                || lit.as_bool().is_some()
                || earlier.iter().any(|x| *x == lit || *x == neg))
        } else {
            true
        };
        earlier.push(lit);
    }
}
