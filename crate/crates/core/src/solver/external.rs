//! External solvers: a shell command receives the query on stdin and
//! answers `sat`, `unsat` or `unknown`, followed by a model.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use num::bigint::BigInt;

use super::{smtlib, CheckResult, Decls, Model};
use crate::symbolic::Term;

pub fn solve(
    cmd: &str,
    decls: &Decls,
    prefs: &Model,
    modulus: &BTreeMap<String, BigInt>,
    lits: &[Term],
) -> CheckResult {
    let text = smtlib::emit(decls, lits, modulus);
    let out = match run(cmd, &text) {
        Ok(o) => o,
        Err(e) => return CheckResult::Unknown(format!("solver failure: {e}")),
    };
    let trimmed = out.trim_start();
    let (verdict, rest) = trimmed
        .split_once(char::is_whitespace)
        .unwrap_or((trimmed, ""));
    match verdict {
        "unsat" => CheckResult::Unsat,
        "unknown" => CheckResult::Unknown("external solver returned unknown".into()),
        "sat" => {
            let mut model = match smtlib::parse_model(rest, decls) {
                Ok(m) => m,
                Err(e) => return CheckResult::Unknown(format!("unreadable model: {e}")),
            };
            for (n, _) in &decls.vars {
                if !model.contains_key(n) {
                    if let Some(p) = prefs.get(n) {
                        model.insert(n.clone(), p.clone());
                    }
                }
            }
            match lits.iter().find(|l| !l.holds(&model)) {
                Some(bad) => CheckResult::Unknown(format!("external model violates `{bad}`")),
                None => CheckResult::Sat(model),
            }
        }
        other => CheckResult::Unknown(format!("solver failure: unexpected answer `{other}`")),
    }
}

fn run(cmd: &str, input: &str) -> std::io::Result<String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    if let Some(mut stdin) = child.stdin.take() {
        // A solver may exit before reading everything; its answer still counts.
        let _ = stdin.write_all(input.as_bytes());
    }
    let out = child.wait_with_output()?;
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{CmpOp, Sort};
    use crate::value::Value;

    fn decls() -> Decls {
        let mut d = Decls::default();
        d.var("x", Sort::Int).var("b", Sort::Bool);
        d
    }

    #[test]
    fn scripted_answers() {
        let x = Term::var("x", Sort::Int);
        let lit = [Term::cmp(CmpOp::Gt, x, Term::int(2))];
        let prefs: Model = [("b".to_string(), Value::Bool(true))].into_iter().collect();
        let r = solve(
            "cat > /dev/null; printf 'sat\\n((define-fun x () Int 3))\\n'",
            &decls(),
            &prefs,
            &BTreeMap::new(),
            &lit,
        );
        let CheckResult::Sat(m) = r else {
            panic!("{r:?}")
        };
        assert_eq!(m["x"], Value::int(3));
        assert_eq!(m["b"], Value::Bool(true));
        let r = solve(
            "cat > /dev/null; echo unsat",
            &decls(),
            &prefs,
            &BTreeMap::new(),
            &lit,
        );
        assert_eq!(r, CheckResult::Unsat);
        let r = solve(
            "cat > /dev/null; printf 'sat\\n((define-fun x () Int 1))\\n'",
            &decls(),
            &prefs,
            &BTreeMap::new(),
            &lit,
        );
        assert!(matches!(r, CheckResult::Unknown(_)));
        let r = solve("exit 3", &decls(), &prefs, &BTreeMap::new(), &lit);
        assert!(matches!(r, CheckResult::Unknown(_)));
    }
}
