//! Replays stored testcases on the reference interpreter.

use std::fmt;

use super::json::StoredTest;
use crate::ast::Program;
use crate::interp::{run_scope, Mode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { expected: String, got: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail { expected, got } => write!(f, "fail: expected {expected}, got {got}"),
        }
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("program has no scope `{0}`")]
    UnknownScope(String),
    #[error("inputs of the testcase do not match scope `{scope}`: {detail}")]
    Signature { scope: String, detail: String },
}

/// Runs the recorded inputs eagerly and compares outcomes: values exactly,
/// empty and conflict by class.
pub fn replay(prog: &Program, t: &StoredTest) -> Result<Verdict, ReplayError> {
    let scope = prog
        .scope(&t.scope)
        .ok_or_else(|| ReplayError::UnknownScope(t.scope.clone()))?;
    let names_match = scope.inputs.len() == t.inputs.len()
        && scope.inputs.iter().all(|(n, _)| t.inputs.contains_key(n));
    if !names_match {
        return Err(ReplayError::Signature {
            scope: t.scope.clone(),
            detail: format!(
                "expected inputs {:?}",
                scope
                    .inputs
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
            ),
        });
    }
    Ok(match run_scope(prog, &t.scope, &t.inputs, Mode::Eager) {
        Ok(o) if o == t.outcome => Verdict::Pass,
        Ok(o) => Verdict::Fail {
            expected: t.outcome.to_string(),
            got: o.to_string(),
        },
        Err(e) => Verdict::Fail {
            expected: t.outcome.to_string(),
            got: e.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::{explore, Config, Opts};
    use crate::parser::parse;
    use crate::testkit::mutate::{mutate, MutationOp};

    const BRANCHING: &str = "scope Main { input b: bool; input x: int;
        def y: int = default <rule (b :- 1), rule (x == 0 :- 2)> (x > 0 :- 3);
        output y; }";

    #[test]
    fn emitted_tests_pass_and_conflict_row_replays() {
        let prog = parse(BRANCHING).unwrap();
        let suite = explore(&prog, "Main", &Config::with_opts(Opts::none())).unwrap();
        for t in &suite.tests {
            assert_eq!(replay(&prog, &StoredTest::of(t)), Ok(Verdict::Pass));
        }
        let conflict = suite
            .tests
            .iter()
            .find(|t| t.outcome.kind() == "conflict")
            .unwrap();
        assert_eq!(conflict.inputs["x"], crate::value::Value::int(0));
        assert_eq!(conflict.inputs["b"], crate::value::Value::Bool(true));
    }

    #[test]
    fn mutant_changes_verdict() {
        let prog = parse(
            "scope S { input b: bool;
               def y: int = default <rule (b :- 1)> (true :- 0); output y; }",
        )
        .unwrap();
        let suite = explore(&prog, "S", &Config::with_opts(Opts::none())).unwrap();
        let m = mutate(&prog, MutationOp::DuplicateException, 0).unwrap();
        let verdicts: Vec<Verdict> = suite
            .tests
            .iter()
            .map(|t| replay(&m.program, &StoredTest::of(t)).unwrap())
            .collect();
        assert!(verdicts.iter().any(|v| !v.is_pass()), "{verdicts:?}");
    }

    #[test]
    fn signature_mismatch() {
        let prog = parse(BRANCHING).unwrap();
        let suite = explore(&prog, "Main", &Config::default()).unwrap();
        let mut t = StoredTest::of(&suite.tests[0]);
        t.inputs.remove("x");
        assert!(matches!(
            replay(&prog, &t),
            Err(ReplayError::Signature { .. })
        ));
        t.scope = "Other".into();
        assert!(matches!(
            replay(&prog, &t),
            Err(ReplayError::UnknownScope(_))
        ));
    }
}
