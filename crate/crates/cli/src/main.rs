use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use defcalc::ast::Program;
use defcalc::explorer::{explore, Config, Opts, TestSuite};
use defcalc::parser::{parse_value, print_program, Diagnostic, SourceUnit};
use defcalc::solver::Backend;
use defcalc::testkit::campaign::{mutation_campaign, CampaignConfig};
use defcalc::testkit::{emit_suite, load_tests, mutate, replay, MutationKind};
use defcalc::validate::validate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Concolic test generation for default-logic programs.
#[derive(Parser)]
#[command(name = "defcalc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore a scope and generate one testcase per path.
    Run(RunArgs),
    /// Check stored testcases against the reference interpreter.
    Replay {
        file: PathBuf,
        #[arg(long)]
        tests: PathBuf,
    },
    /// Write mutants of a program.
    Mutate {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "remove,duplicate,negate")]
        ops: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate reachable mutants and check that exploration exposes them.
    Campaign {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scope to explore; defaults to the first one.
        #[arg(long)]
        scope: Option<String>,
        #[arg(long, default_value = "remove,duplicate,negate")]
        ops: String,
        /// Seconds of exploration per mutant.
        #[arg(long, default_value_t = 5.0)]
        budget: f64,
        #[arg(long, default_value = "all")]
        opts: String,
    },
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long)]
    scope: String,
    /// Comma-separated optimizations, `all` or `none`.
    #[arg(long, default_value = "none")]
    opts: String,
    /// Same as adding `soft` to --opts.
    #[arg(long)]
    soft: bool,
    /// Same as adding `early-error` to --opts.
    #[arg(long)]
    early_error: bool,
    /// `builtin` or `smtlib:COMMAND`; DEFCALC_SOLVER takes precedence.
    #[arg(long, default_value = "builtin")]
    solver: String,
    #[arg(long)]
    no_incremental: bool,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    timeout: Option<f64>,
    /// Initial value of an input, as `name=value`.
    #[arg(long = "initial", value_name = "NAME=VALUE", num_args = 1..)]
    initial: Vec<String>,
    #[arg(long)]
    emit_tests: Option<PathBuf>,
    #[arg(long)]
    emit_smtlib: Option<PathBuf>,
    #[arg(long)]
    stats: bool,
}

fn load(path: &Path) -> Result<Program> {
    let unit = SourceUnit::load(path).with_context(|| format!("cannot read {}", path.display()))?;
    let prog = unit.parse().map_err(|ds| {
        let lines: Vec<String> = ds.iter().map(|d| unit.render(d)).collect();
        anyhow!(lines.join("\n"))
    })?;
    let errors = validate(&prog);
    if !errors.is_empty() {
        let lines: Vec<String> = errors
            .iter()
            .map(|e| unit.render(&Diagnostic::new(e.span, e.message.clone())))
            .collect();
        bail!(lines.join("\n"));
    }
    Ok(prog)
}

fn parse_opts(s: &str) -> Result<Opts> {
    s.parse::<Opts>().map_err(|e| anyhow!(e))
}

fn parse_backend(flag: &str) -> Result<Backend> {
    let chosen = std::env::var("DEFCALC_SOLVER").unwrap_or_else(|_| flag.to_string());
    chosen.parse::<Backend>().map_err(|e| anyhow!("{e}"))
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| anyhow!("invalid duration {s}"))
}

fn print_suite(suite: &TestSuite) {
    for (i, t) in suite.tests.iter().enumerate() {
        let inputs: Vec<String> = t.inputs.iter().map(|(n, v)| format!("{n}={v}")).collect();
        let tier = t.soft_tier.map(|s| format!(" [{s}]")).unwrap_or_default();
        println!("#{} {} -> {}{tier}", i + 1, inputs.join(", "), t.outcome);
    }
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let mut opts = parse_opts(&a.opts)?;
    opts.soft |= a.soft;
    opts.early_error |= a.early_error;
    let backend = parse_backend(&a.solver)?;
    let prog = load(&a.file)?;
    let scope = prog
        .scope(&a.scope)
        .ok_or_else(|| anyhow!("no scope named `{}`", a.scope))?;
    let mut config = Config::with_opts(opts);
    config.backend = backend;
    config.incremental = !a.no_incremental;
    config.max_iters = a.max_iters;
    config.timeout = a.timeout.map(seconds).transpose()?;
    for hint in &a.initial {
        let (name, text) = hint
            .split_once('=')
            .ok_or_else(|| anyhow!("--initial expects NAME=VALUE, got `{hint}`"))?;
        let ty = scope
            .input_type(name)
            .ok_or_else(|| anyhow!("scope `{}` has no input `{name}`", a.scope))?;
        let v = parse_value(&prog, ty, text).map_err(|e| anyhow!("--initial {name}: {e}"))?;
        config.initial.insert(name.to_string(), v);
    }
    if let Some(dir) = &a.emit_smtlib {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        config.emit_smtlib = Some(dir.clone());
    }
    let suite = explore(&prog, &a.scope, &config)?;
    print_suite(&suite);
    if let Some(dir) = &a.emit_tests {
        emit_suite(&suite, dir)?;
    }
    let s = &suite.stats;
    if a.stats {
        println!(
            "solver_calls={} tests={} conflicts={} empties={} sat={} unsat={} unknown={} iterations={}",
            s.solver_calls, s.tests, s.conflicts, s.empties, s.sat, s.unsat, s.unknown, s.iterations
        );
    }
    if suite.complete {
        println!("{} tests, exploration complete", s.tests);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} tests, stopped by budget", s.tests);
        Ok(ExitCode::from(2))
    }
}

fn replay_cmd(file: &Path, dir: &Path) -> Result<ExitCode> {
    let prog = load(file)?;
    let tests = load_tests(&prog, dir)?;
    let mut pass = 0;
    for (i, t) in tests.iter().enumerate() {
        let v = replay(&prog, t)?;
        if v.is_pass() {
            pass += 1;
        } else {
            println!("test {i}: {v}");
        }
    }
    println!("{pass}/{} pass", tests.len());
    Ok(if pass == tests.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn mutate_cmd(file: &Path, count: usize, ops: &str, seed: u64, out: &Path) -> Result<ExitCode> {
    let kinds = MutationKind::parse_list(ops).map_err(|e| anyhow!(e))?;
    if kinds.is_empty() {
        bail!("--ops lists no mutation");
    }
    let prog = load(file)?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let op = kinds[rng.gen_range(0..kinds.len())].instantiate(&mut rng);
        let m = mutate(&prog, op, rng.gen())?;
        let path = out.join(format!("mutant_{i:03}.dfc"));
        let text = format!(
            "# {} at {} (seed {})\n{}",
            m.op,
            m.target,
            m.seed,
            print_program(&m.program)
        );
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}: {} at {}", path.display(), m.op, m.target);
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn campaign_cmd(
    file: &Path,
    count: usize,
    seed: u64,
    scope: Option<String>,
    ops: &str,
    budget: f64,
    opts: &str,
) -> Result<ExitCode> {
    let prog = load(file)?;
    let scope = match scope {
        Some(s) => s,
        None => prog
            .scopes
            .first()
            .map(|s| s.name.clone())
            .ok_or_else(|| anyhow!("{} declares no scope", file.display()))?,
    };
    let mut cfg = CampaignConfig::new(&scope, count, seed);
    cfg.kinds = MutationKind::parse_list(ops).map_err(|e| anyhow!(e))?;
    cfg.budget = seconds(budget)?;
    cfg.explore = Config::with_opts(parse_opts(opts)?);
    let report = mutation_campaign(&prog, &cfg)?;
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let r = match cli.command {
        Command::Run(a) => run(a),
        Command::Replay { file, tests } => replay_cmd(&file, &tests),
        Command::Mutate {
            file,
            count,
            ops,
            seed,
            out,
        } => mutate_cmd(&file, count, &ops, seed, &out),
        Command::Campaign {
            file,
            count,
            seed,
            scope,
            ops,
            budget,
            opts,
        } => campaign_cmd(&file, count, seed, scope, &ops, budget, &opts),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
