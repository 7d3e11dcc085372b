//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use defcalc::ast::Program;
use defcalc::explorer::{explore, Config, Opts, TestSuite, Testcase};
use defcalc::interp::{eval, Env, Mode};
use defcalc::parser::parse;
use defcalc::solver::{Backend, CheckResult, Decls, Model, Session, SoftTier};
use defcalc::testkit::campaign::{exposes, mutation_campaign, CampaignConfig};
use defcalc::testkit::json::{emit_suite, testcase_from_json, testcase_to_json};
use defcalc::testkit::{replay, StoredTest, Verdict};
use defcalc::validate::validate;
use defcalc::value::{SemType, Value};
use num::bigint::BigInt;
use num::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRACE_TIME: Duration = Duration::from_secs(1);
const TAX_TIME: Duration = Duration::from_secs(1);
const TERMS: usize = 1000;
const ENVS_PER_TERM: usize = 20;
const TERM_DEPTH: u32 = 3;
const ORACLE_SCOPES: usize = 200;
const ORACLE_TIME: Duration = Duration::from_secs(60);
const MUTANTS: usize = 20;
const MUTANT_TIME: Duration = Duration::from_secs(5);
const SOFT_SHARE: f64 = 0.90;
const CORPUS_SEED: u64 = 0x5eed_0001;
const SCOPE_SEED: u64 = 0x5eed_0005;
const CAMPAIGN_SEED: u64 = 1;

/// Suites collected for the replay criterion, with the program that
/// produced them.
#[derive(Default)]
struct Collected {
    suites: Vec<(String, Program, Vec<Testcase>)>,
}

impl Collected {
    fn add(&mut self, label: &str, prog: &Program, suite: &TestSuite) {
        self.suites
            .push((label.to_string(), prog.clone(), suite.tests.clone()));
    }
}

type Check = Result<String, String>;
type Criterion = fn(&mut Collected) -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(prog: &Program, scope: &str, cfg: &Config) -> Result<TestSuite, String> {
    explore(prog, scope, cfg).map_err(|e| e.to_string())
}

fn classes(s: &TestSuite) -> BTreeSet<String> {
    let mut c: BTreeSet<String> = s.tests.iter().map(|t| t.outcome.to_string()).collect();
    if s.stats.violations > 0 {
        c.insert("violation".into());
    }
    c
}

fn path_strings(t: &Testcase) -> Vec<String> {
    t.path.iter().map(|r| r.to_string()).collect()
}

fn int_of(v: &Value) -> BigInt {
    match v {
        Value::Int(n) | Value::Money(n) => n.clone(),
        other => panic!("not an integer: {other}"),
    }
}

fn branching_config() -> Config {
    let mut cfg = Config::with_opts(Opts::none());
    cfg.initial = [
        ("b".to_string(), Value::Bool(true)),
        ("x".to_string(), Value::int(3)),
    ]
    .into_iter()
    .collect();
    cfg
}

fn criterion_1(col: &mut Collected) -> Check {
    let prog = common::load("branching.dfc");
    let start = Instant::now();
    let suite = run(&prog, "Main", &branching_config())?;
    let elapsed = start.elapsed();
    col.add("branching", &prog, &suite);
    ensure(suite.tests.len() == 5, || {
        format!("{} testcases", suite.tests.len())
    })?;
    let expected: [(bool, Option<i64>, &str, &[&str]); 5] = [
        (true, Some(3), "y = 1", &["b:T", "x = 0:F"]),
        (true, Some(0), "conflict", &["b:T", "x = 0:T"]),
        (false, Some(3), "y = 3", &["b:F", "x = 0:F", "x > 0:T"]),
        (false, None, "empty", &["b:F", "x = 0:F", "x > 0:F"]),
        (false, Some(0), "y = 2", &["b:F", "x = 0:T"]),
    ];
    for (i, (t, (b, x, out, path))) in suite.tests.iter().zip(expected).enumerate() {
        let tb = t.inputs["b"].as_bool().unwrap_or(!b);
        let tx = int_of(&t.inputs["x"]);
        ensure(tb == b, || format!("row {}: b = {tb}", i + 1))?;
        match x {
            Some(x) => ensure(tx == BigInt::from(x), || format!("row {}: x = {tx}", i + 1))?,
            // not b, not (x = 0), not (x > 0)
            None => ensure(tx < BigInt::from(0), || {
                format!("row {}: x = {tx} violates the row", i + 1)
            })?,
        }
        ensure(t.outcome.to_string() == out, || {
            format!("row {}: output {}", i + 1, t.outcome)
        })?;
        ensure(path_strings(t) == path, || {
            format!("row {}: path {:?}", i + 1, path_strings(t))
        })?;
    }
    ensure(elapsed < TRACE_TIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "5 rows match, row 4 x = {}, {:?}",
        suite.tests[3].inputs["x"], elapsed
    ))
}

fn criterion_2(col: &mut Collected) -> Check {
    let prog = common::load("tax.dfc");
    let mut details = Vec::new();
    for opts in [Opts::none(), Opts::all()] {
        let start = Instant::now();
        let suite = run(&prog, "IncomeTax", &Config::with_opts(opts))?;
        let elapsed = start.elapsed();
        col.add("tax", &prog, &suite);
        ensure(suite.tests.len() == 4, || {
            format!("{opts}: {} testcases", suite.tests.len())
        })?;
        let threshold = BigInt::from(1_000_000);
        let mut seen = BTreeSet::new();
        for t in &suite.tests {
            let income = int_of(&t.inputs["income"]);
            let kids = int_of(&t.inputs["nb_children"]);
            let low = income <= threshold;
            let family = kids >= BigInt::from(3);
            // tax = round(income * rate), halves away from zero
            let expect = |num: i64, den: i64| {
                let (q, r) = (&income * num).div_rem(&BigInt::from(den));
                let cents = if BigInt::from(2) * r >= BigInt::from(den) {
                    q + 1
                } else {
                    q
                };
                format!("income_tax = {}", Value::Money(cents))
            };
            let class = match (low, family) {
                (true, false) => ("exempt", "income_tax = $0.00".to_string()),
                (true, true) => ("conflict", "conflict".to_string()),
                (false, false) => ("20%", expect(20, 100)),
                (false, true) => ("15%", expect(15, 100)),
            };
            ensure(t.outcome.to_string() == class.1, || {
                format!(
                    "{opts}: {} {}: got {}, expected {}",
                    income, kids, t.outcome, class.1
                )
            })?;
            if !low {
                ensure(income == BigInt::from(1_000_001), || {
                    format!("{opts}: income {income}")
                })?;
            }
            seen.insert(class.0);
        }
        ensure(seen.len() == 4, || format!("{opts}: classes {seen:?}"))?;
        let high: Vec<String> = suite
            .tests
            .iter()
            .filter(|t| int_of(&t.inputs["income"]) > threshold)
            .map(|t| t.outcome.to_string())
            .collect();
        ensure(
            high.contains(&"income_tax = $2,000.00".to_string())
                && high.contains(&"income_tax = $1,500.00".to_string()),
            || format!("{opts}: above-threshold outcomes {high:?}"),
        )?;
        ensure(elapsed < TAX_TIME, || format!("{opts}: took {elapsed:?}"))?;
        details.push(format!("{opts}: {elapsed:?}"));
    }
    Ok(format!(
        "4 classes, $2,000.00 and $1,500.00 at $10,000.01 ({})",
        details.join(", ")
    ))
}

fn term_corpus() -> Vec<(defcalc::ast::Expr, Vec<Env>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..TERMS)
        .map(|_| {
            let t = common::default_term(&mut rng, TERM_DEPTH);
            let envs = (0..ENVS_PER_TERM)
                .map(|_| common::term_env(&mut rng))
                .collect();
            (t, envs)
        })
        .collect()
}

fn criterion_3(_: &mut Collected) -> Check {
    let prog = Program::default();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 3);
    let mut checks = 0;
    let mut kinds = [0usize; 3];
    for (t, envs) in term_corpus() {
        for env in envs {
            let reference = eval(&prog, &t, &env, Mode::Eager);
            let p = common::permute(&t, &mut rng);
            let v = eval(&prog, &p, &env, Mode::Eager);
            ensure(v == reference, || {
                format!(
                    "{} under {env:?}: {reference} but permuted {} gives {v}",
                    defcalc::parser::print_expr(&t),
                    defcalc::parser::print_expr(&p)
                )
            })?;
            checks += 1;
            kinds[match v {
                Value::Conflict => 0,
                Value::Empty => 1,
                _ => 2,
            }] += 1;
        }
    }
    Ok(format!(
        "{checks} (term, env, permutation) triples agree ({} conflict, {} empty, {} value)",
        kinds[0], kinds[1], kinds[2]
    ))
}

fn criterion_4(_: &mut Collected) -> Check {
    let prog = Program::default();
    let mut checks = 0;
    for (t, envs) in term_corpus() {
        for env in envs {
            let e = eval(&prog, &t, &env, Mode::Eager);
            let l = eval(&prog, &t, &env, Mode::Lazy);
            ensure(e == l, || {
                format!(
                    "{} under {env:?}: eager {e}, lazy {l}",
                    defcalc::parser::print_expr(&t)
                )
            })?;
            checks += 1;
        }
    }
    Ok(format!("{checks} (term, env) pairs agree"))
}

fn criterion_5(col: &mut Collected) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SCOPE_SEED);
    let start = Instant::now();
    let mut classes_total = 0;
    for i in 0..ORACLE_SCOPES {
        let s = common::random_scope(&mut rng, true);
        let prog = parse(&s.source)
            .map_err(|e| format!("scope {i} does not parse: {e:?}\n{}", s.source))?;
        let errs = validate(&prog);
        ensure(errs.is_empty(), || {
            format!("scope {i} invalid: {errs:?}\n{}", s.source)
        })?;
        let opts = if i % 2 == 0 {
            Opts::none()
        } else {
            Opts::all()
        };
        let suite = run(&prog, "R", &Config::with_opts(opts))?;
        ensure(suite.complete, || format!("scope {i} incomplete"))?;
        let found = classes(&suite);
        let expected = common::brute_force_classes(&prog, "R", &common::all_inputs(&s, -8..=8));
        ensure(found == expected, || {
            format!(
                "scope {i} ({opts}): explored {found:?}, enumerated {expected:?}\n{}",
                s.source
            )
        })?;
        classes_total += expected.len();
        col.add(&format!("oracle {i}"), &prog, &suite);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_TIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_SCOPES} scopes, {classes_total} outcome classes, 0 misses, {elapsed:?}"
    ))
}

fn criterion_6(col: &mut Collected) -> Check {
    let prog = common::load("benefits_medium.dfc");
    let cfg = CampaignConfig::new("Benefits", MUTANTS, CAMPAIGN_SEED);
    let report = mutation_campaign(&prog, &cfg).map_err(|e| e.to_string())?;
    ensure(report.mutants.len() == MUTANTS, || {
        format!(
            "only {} reachable mutants in {} attempts",
            report.mutants.len(),
            report.attempts
        )
    })?;
    let mut slowest = Duration::ZERO;
    for (i, m) in report.mutants.iter().enumerate() {
        ensure(m.found, || {
            format!("mutant {} ({} at {}) missed", i + 1, m.op, m.target)
        })?;
        ensure(m.elapsed <= MUTANT_TIME, || {
            format!("mutant {} took {:?}", i + 1, m.elapsed)
        })?;
        let (w, o) = (
            m.witness.as_ref().unwrap(),
            m.witness_outcome.as_ref().unwrap(),
        );
        ensure(exposes(&prog, &m.program, "Benefits", w, o), || {
            format!("mutant {} witness does not differ from base", i + 1)
        })?;
        slowest = slowest.max(m.elapsed);
        if let Some(s) = &m.suite {
            col.add(&format!("mutant {}", i + 1), &m.program, s);
        }
    }
    Ok(format!(
        "{}/{} found, {} screened out, slowest {:?}",
        report.found(),
        report.mutants.len(),
        report.screened_out,
        slowest
    ))
}

fn replays_on(prog: &Program, suite: &TestSuite) -> bool {
    suite
        .tests
        .iter()
        .all(|t| replay(prog, &StoredTest::of(t)) == Ok(Verdict::Pass))
}

fn criterion_7(col: &mut Collected) -> Check {
    let prog = common::load("geo_match.dfc");
    let folded = run(
        &prog,
        "Geo",
        &Config::with_opts(Opts {
            folding: true,
            ..Opts::none()
        }),
    )?;
    let plain = run(&prog, "Geo", &Config::with_opts(Opts::none()))?;
    col.add("geo folded", &prog, &folded);
    col.add("geo plain", &prog, &plain);
    ensure(folded.tests.len() == 2, || {
        format!("folding on: {} paths", folded.tests.len())
    })?;
    ensure(plain.tests.len() == 9, || {
        format!("folding off: {} paths", plain.tests.len())
    })?;
    ensure(folded.complete && plain.complete, || {
        "incomplete exploration".into()
    })?;
    ensure(
        replays_on(&prog, &folded) && replays_on(&prog, &plain),
        || "replay mismatch".into(),
    )?;
    ensure(classes(&folded) == classes(&plain), || {
        format!(
            "classes differ: {:?} vs {:?}",
            classes(&folded),
            classes(&plain)
        )
    })?;
    Ok(format!(
        "2 paths folded, 9 unfolded, {} arms removed",
        folded.transforms.arms_folded
    ))
}

fn criterion_8(col: &mut Collected) -> Check {
    let prog = common::load("trivial.dfc");
    let on = run(
        &prog,
        "Allowance",
        &Config::with_opts(Opts {
            trivial: true,
            ..Opts::none()
        }),
    )?;
    let off = run(&prog, "Allowance", &Config::with_opts(Opts::none()))?;
    col.add("trivial on", &prog, &on);
    col.add("trivial off", &prog, &off);
    ensure(on.stats.solver_calls < off.stats.solver_calls, || {
        format!(
            "solver calls {} (on) vs {} (off)",
            on.stats.solver_calls, off.stats.solver_calls
        )
    })?;
    ensure(classes(&on) == classes(&off), || {
        format!("classes differ: {:?} vs {:?}", classes(&on), classes(&off))
    })?;
    Ok(format!(
        "solver calls {} with trivial filtering, {} without",
        on.stats.solver_calls, off.stats.solver_calls
    ))
}

fn emitted_bytes(suite: &TestSuite) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = emit_suite(suite, dir.path()).map_err(|e| e.to_string())?;
    files
        .iter()
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::read(f)
                .map(|b| (name, b))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_9(col: &mut Collected) -> Check {
    let cases: Vec<(&str, &str, Config)> = vec![
        ("branching.dfc", "Main", branching_config()),
        ("tax.dfc", "IncomeTax", Config::with_opts(Opts::none())),
        ("tax.dfc", "IncomeTax", Config::with_opts(Opts::all())),
        (
            "geo_match.dfc",
            "Geo",
            Config::with_opts(Opts {
                folding: true,
                ..Opts::none()
            }),
        ),
        ("geo_match.dfc", "Geo", Config::with_opts(Opts::none())),
    ];
    let mut files = 0;
    for (file, scope, cfg) in cases {
        let prog = common::load(file);
        let inc = run(&prog, scope, &cfg)?;
        let mut fresh_cfg = cfg.clone();
        fresh_cfg.incremental = false;
        let fresh = run(&prog, scope, &fresh_cfg)?;
        col.add(file, &prog, &fresh);
        let (a, b) = (emitted_bytes(&inc)?, emitted_bytes(&fresh)?);
        ensure(a == b, || format!("{file} ({}): suites differ", cfg.opts))?;
        files += a.len();
    }
    Ok(format!("{files} emitted files byte-identical across modes"))
}

struct Ladder {
    tiered: usize,
    total: usize,
    counts: [usize; 3],
    verified: usize,
}

/// Checks every tier predicate and maximality on one scope.
fn ladder(col: &mut Collected, prog: &Program, scope: &str) -> Result<Ladder, String> {
    let opts = Opts {
        soft: true,
        ..Opts::all()
    };
    let suite = run(prog, scope, &Config::with_opts(opts))?;
    col.add(scope, prog, &suite);
    let money: Vec<String> = prog
        .scope(scope)
        .unwrap()
        .inputs
        .iter()
        .filter(|(_, t)| *t == SemType::Money)
        .map(|(n, _)| n.clone())
        .collect();
    let modulus = |t: SoftTier| BigInt::from(t.modulus_cents());
    let on_tier = |env: &Env, t: SoftTier| {
        money
            .iter()
            .all(|m| int_of(&env[m.as_str()]).is_multiple_of(&modulus(t)))
    };
    let mut out = Ladder {
        tiered: 0,
        total: suite.tests.len(),
        counts: [0; 3],
        verified: 0,
    };
    for (i, t) in suite.tests.iter().enumerate() {
        if let Some(tier) = t.soft_tier {
            ensure(on_tier(&t.inputs, tier), || {
                format!("{scope} test {i}: inputs off tier {tier}")
            })?;
            out.tiered += 1;
            out.counts[SoftTier::LADDER.iter().position(|x| *x == tier).unwrap()] += 1;
        }
        let above = match t.soft_tier {
            Some(tier) => tier.higher(),
            None => Some(SoftTier::T1),
        };
        let Some(above) = above else { continue };
        match &t.query {
            None => {
                ensure(!on_tier(&t.inputs, above), || {
                    format!("{scope} test {i}: initial input is on {above}")
                })?;
            }
            Some(q) => {
                let mut s = Session::new(
                    Backend::Builtin,
                    Decls::for_scope(prog, scope),
                    Model::new(),
                );
                s.push(q.clone());
                let m = money.iter().map(|v| (v.clone(), modulus(above))).collect();
                let r = s.check_modulo(&m);
                ensure(r == CheckResult::Unsat, || {
                    format!("{scope} test {i}: tier {above} is {r:?}")
                })?;
                out.verified += 1;
            }
        }
    }
    Ok(out)
}

fn criterion_10(col: &mut Collected) -> Check {
    let prog = common::load("soft.dfc");
    let h = ladder(col, &prog, "Housing")?;
    ensure(h.total > 0, || "no testcases".into())?;
    let share = h.tiered as f64 / h.total as f64;
    ensure(share >= SOFT_SHARE, || {
        format!("only {}/{} tiered", h.tiered, h.total)
    })?;
    let d = ladder(col, &prog, "Deposit")?;
    ensure(d.verified > 0, || "no lower rung reached on Deposit".into())?;
    Ok(format!(
        "Housing {}/{} tiered (T100 {}, T10 {}, T1 {}); Deposit tiers {:?} + {} untiered, {} higher rungs verified unsat",
        h.tiered,
        h.total,
        h.counts[0],
        h.counts[1],
        h.counts[2],
        d.counts,
        d.total - d.tiered,
        h.verified + d.verified
    ))
}

fn criterion_11(col: &mut Collected) -> Check {
    let mut total = 0;
    for (label, prog, tests) in &col.suites {
        for t in tests {
            let json = testcase_to_json(&StoredTest::of(t));
            let stored = testcase_from_json(prog, &json).map_err(|e| format!("{label}: {e}"))?;
            let v = replay(prog, &stored).map_err(|e| format!("{label}: {e}"))?;
            ensure(v == Verdict::Pass, || {
                format!("{label}: {:?} -> {v}", t.inputs)
            })?;
            ensure(stored.outcome == t.outcome, || {
                format!("{label}: outcome changed in JSON")
            })?;
            total += 1;
        }
    }
    ensure(total > 0, || "nothing to replay".into())?;
    Ok(format!(
        "{total} testcases from {} suites replay",
        col.suites.len()
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("golden branching trace", criterion_1),
        ("income-tax enumeration", criterion_2),
        ("exception order independence", criterion_3),
        ("eager and lazy agree", criterion_4),
        ("oracle exhaustiveness", criterion_5),
        ("mutation campaign", criterion_6),
        ("match folding effect", criterion_7),
        ("trivial filtering effect", criterion_8),
        ("incremental equivalence", criterion_9),
        ("soft-constraint ladder", criterion_10),
        ("replay closure", criterion_11),
    ];
    let mut col = Collected::default();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(|| f(&mut col)))
            .unwrap_or_else(|p| Err(format!("panicked: {p:?}")));
        match r {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
