use std::path::PathBuf;
use std::process::{Command, Output};

fn program(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/programs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn defcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defcalc"))
        .args(args)
        .env_remove("DEFCALC_SOLVER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn branching_trace_with_stats() {
    let f = program("branching.dfc");
    let o = defcalc(&[
        "run",
        &f,
        "--scope",
        "Main",
        "--opts",
        "none",
        "--stats",
        "--initial",
        "b=true",
        "x=3",
    ]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    assert!(
        out.lines()
            .next()
            .unwrap()
            .starts_with("#1 b=true, x=3 -> y = 1"),
        "{out}"
    );
    assert!(out.contains("solver_calls="));
    assert!(out.contains("tests=5 conflicts=1 empties=1"), "{out}");
    assert!(out.ends_with("5 tests, exploration complete\n"));
}

#[test]
fn emitted_tax_tests_replay() {
    let f = program("tax.dfc");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = defcalc(&[
        "run",
        &f,
        "--scope",
        "IncomeTax",
        "--opts",
        "all",
        "--soft",
        "--emit-tests",
        d,
    ]);
    assert!(o.status.success(), "{o:?}");
    let tests = std::fs::read_dir(d)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("test_")
        })
        .count();
    assert_eq!(tests, 4);
    let r = defcalc(&["replay", &f, "--tests", d]);
    assert!(r.status.success(), "{r:?}");
    assert_eq!(stdout(&r).trim(), "4/4 pass");
}

#[test]
fn tampered_test_fails_replay() {
    let f = program("tax.dfc");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(
        defcalc(&["run", &f, "--scope", "IncomeTax", "--emit-tests", d])
            .status
            .success()
    );
    let first = dir.path().join("test_000000.json");
    let text = std::fs::read_to_string(&first).unwrap();
    std::fs::write(&first, text.replace("\"value\"", "\"empty\"")).unwrap();
    let r = defcalc(&["replay", &f, "--tests", d]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("3/4 pass"), "{}", stdout(&r));
}

#[test]
fn unknown_opt_is_rejected() {
    let o = defcalc(&[
        "run",
        &program("tax.dfc"),
        "--scope",
        "IncomeTax",
        "--opts",
        "lazy,warp",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(defcalc(&["run"]).status.code(), Some(1));
    assert_eq!(defcalc(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_stop_exits_two() {
    let o = defcalc(&[
        "run",
        &program("tax.dfc"),
        "--scope",
        "IncomeTax",
        "--max-iters",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).ends_with("stopped by budget\n"));
}

#[test]
fn environment_overrides_solver_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_defcalc"))
        .args([
            "run",
            &program("tax.dfc"),
            "--scope",
            "IncomeTax",
            "--solver",
            "smtlib:false",
        ])
        .env("DEFCALC_SOLVER", "builtin")
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let o = Command::new(env!("CARGO_BIN_EXE_defcalc"))
        .args(["run", &program("tax.dfc"), "--scope", "IncomeTax"])
        .env("DEFCALC_SOLVER", "z4000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mutate_writes_parsable_mutants() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = defcalc(&[
        "mutate",
        &program("tax.dfc"),
        "--count",
        "3",
        "--seed",
        "7",
        "--out",
        d,
    ]);
    assert!(o.status.success(), "{o:?}");
    for i in 0..3 {
        let m = dir.path().join(format!("mutant_{i:03}.dfc"));
        let r = defcalc(&["run", m.to_str().unwrap(), "--scope", "IncomeTax"]);
        assert!(r.status.success(), "{r:?}");
    }
}

#[test]
fn campaign_reports_found_mutants() {
    let o = defcalc(&[
        "campaign",
        &program("tax.dfc"),
        "--count",
        "3",
        "--seed",
        "1",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("found 3/3"), "{}", stdout(&o));
}
