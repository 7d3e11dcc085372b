//! Testcase files. Numbers are exact: integers are JSON numbers (decimal
//! strings beyond 64 bits), money is `{"cents": N}` and rationals are
//! `{"num": N, "den": D}`.

use std::path::{Path, PathBuf};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use serde_json::{json, Map, Value as Json};

use crate::ast::{Program, Scope};
use crate::explorer::{Stats, TestSuite, Testcase};
use crate::interp::{Env, Outcome};
use crate::solver::SoftTier;
use crate::value::{SemType, Value};

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
}

fn shape<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError::Shape(msg.into()))
}

/// A testcase as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredTest {
    pub scope: String,
    pub inputs: Env,
    pub outcome: Outcome,
    pub path_fp: String,
    pub soft_tier: Option<SoftTier>,
    pub iter: u64,
    pub solver_calls: u64,
    pub path: Vec<String>,
}

impl StoredTest {
    pub fn of(t: &Testcase) -> StoredTest {
        StoredTest {
            scope: t.scope.clone(),
            inputs: t.inputs.clone(),
            outcome: t.outcome.clone(),
            path_fp: t.path_fp.clone(),
            soft_tier: t.soft_tier,
            iter: t.iter,
            solver_calls: t.solver_calls,
            path: t.path.iter().map(|r| r.to_string()).collect(),
        }
    }
}

fn int_json(n: &BigInt) -> Json {
    match n.to_i64() {
        Some(i) => json!(i),
        None => json!(n.to_string()),
    }
}

fn int_of(j: &Json) -> Result<BigInt, JsonError> {
    match j {
        Json::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigInt::from(i)),
            None => match n.as_u64() {
                Some(u) => Ok(BigInt::from(u)),
                None => shape(format!("not an integer: {n}")),
            },
        },
        Json::String(s) => s
            .parse()
            .map_err(|_| JsonError::Shape(format!("not an integer: {s:?}"))),
        other => shape(format!("not an integer: {other}")),
    }
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Bool(b) => json!(b),
        Value::Int(n) => int_json(n),
        Value::Rat(q) => json!({"num": int_json(q.numer()), "den": int_json(q.denom())}),
        Value::Money(c) => json!({"cents": int_json(c)}),
        Value::Enum {
            ty,
            variant,
            payload,
        } => {
            let mut m = Map::new();
            m.insert("enum".into(), json!(ty));
            m.insert("variant".into(), json!(variant));
            if let Some(p) = payload {
                m.insert("payload".into(), value_to_json(p));
            }
            Json::Object(m)
        }
        Value::Struct { ty, fields } => {
            let fs: Map<String, Json> = fields
                .iter()
                .map(|(n, v)| (n.clone(), value_to_json(v)))
                .collect();
            json!({"struct": ty, "fields": fs})
        }
        Value::Empty => json!("empty"),
        Value::Conflict => json!("conflict"),
    }
}

fn field<'a>(j: &'a Json, key: &str) -> Result<&'a Json, JsonError> {
    j.get(key)
        .ok_or_else(|| JsonError::Shape(format!("missing key `{key}` in {j}")))
}

/// Reads a value of type `ty`.
pub fn value_from_json(prog: &Program, ty: &SemType, j: &Json) -> Result<Value, JsonError> {
    match ty {
        SemType::Bool => j
            .as_bool()
            .map(Value::Bool)
            .ok_or_else(|| JsonError::Shape(format!("not a boolean: {j}"))),
        SemType::Int => int_of(j).map(Value::Int),
        SemType::Money => int_of(field(j, "cents")?).map(Value::Money),
        SemType::Rat => {
            let num = int_of(field(j, "num")?)?;
            let den = int_of(field(j, "den")?)?;
            if den.is_zero() {
                return shape("zero denominator");
            }
            Ok(Value::Rat(BigRational::new(num, den)))
        }
        SemType::Enum(name) => {
            let d = prog
                .enum_decl(name)
                .ok_or_else(|| JsonError::Shape(format!("unknown enumeration {name}")))?;
            if field(j, "enum")?.as_str() != Some(name) {
                return shape(format!("expected a value of {name}, got {j}"));
            }
            let vname = field(j, "variant")?
                .as_str()
                .ok_or_else(|| JsonError::Shape("variant is not a string".into()))?;
            let var = d
                .variant(vname)
                .ok_or_else(|| JsonError::Shape(format!("unknown variant {name}::{vname}")))?;
            let payload = match (&var.payload, j.get("payload")) {
                (Some(t), Some(p)) => Some(Box::new(value_from_json(prog, t, p)?)),
                (None, None) => None,
                _ => return shape(format!("payload mismatch for {name}::{vname}")),
            };
            Ok(Value::Enum {
                ty: name.clone(),
                variant: vname.to_string(),
                payload,
            })
        }
        SemType::Struct(name) => {
            let d = prog
                .struct_decl(name)
                .ok_or_else(|| JsonError::Shape(format!("unknown structure {name}")))?;
            let fs = field(j, "fields")?;
            let fields = d
                .fields
                .iter()
                .map(|(f, t)| Ok((f.clone(), value_from_json(prog, t, field(fs, f)?)?)))
                .collect::<Result<Vec<_>, JsonError>>()?;
            Ok(Value::Struct {
                ty: name.clone(),
                fields,
            })
        }
        SemType::Func(..) => shape("functions are not test data"),
    }
}

pub fn outcome_to_json(o: &Outcome) -> Json {
    match o {
        Outcome::Value(vs) => {
            let m: Map<String, Json> = vs
                .iter()
                .map(|(n, v)| (n.clone(), value_to_json(v)))
                .collect();
            json!({"kind": "value", "value": m})
        }
        other => json!({"kind": other.kind()}),
    }
}

pub fn outcome_from_json(prog: &Program, scope: &Scope, j: &Json) -> Result<Outcome, JsonError> {
    match field(j, "kind")?.as_str() {
        Some("empty") => Ok(Outcome::Empty),
        Some("conflict") => Ok(Outcome::Conflict(None)),
        Some("value") => {
            let vs = field(j, "value")?;
            scope
                .outputs
                .iter()
                .map(|n| {
                    let ty = scope
                        .output_type(n)
                        .ok_or_else(|| JsonError::Shape(format!("output {n} has no type")))?;
                    Ok((n.clone(), value_from_json(prog, ty, field(vs, n)?)?))
                })
                .collect::<Result<Vec<_>, JsonError>>()
                .map(Outcome::Value)
        }
        _ => shape(format!("bad outcome kind in {j}")),
    }
}

pub fn testcase_to_json(t: &StoredTest) -> Json {
    let inputs: Map<String, Json> = t
        .inputs
        .iter()
        .map(|(n, v)| (n.clone(), value_to_json(v)))
        .collect();
    json!({
        "scope": t.scope,
        "inputs": inputs,
        "outcome": outcome_to_json(&t.outcome),
        "path_fp": t.path_fp,
        "soft_tier": t.soft_tier.map(|s| s.to_string()),
        "iter": t.iter,
        "solver_calls": t.solver_calls,
        "path": t.path,
    })
}

/// Reads a testcase, typing its values with the scope it names.
pub fn testcase_from_json(prog: &Program, j: &Json) -> Result<StoredTest, JsonError> {
    let scope_name = field(j, "scope")?
        .as_str()
        .ok_or_else(|| JsonError::Shape("scope is not a string".into()))?;
    let scope = prog
        .scope(scope_name)
        .ok_or_else(|| JsonError::Shape(format!("no scope named {scope_name}")))?;
    let raw = field(j, "inputs")?
        .as_object()
        .ok_or_else(|| JsonError::Shape("inputs is not an object".into()))?;
    let mut inputs = Env::new();
    for (n, t) in &scope.inputs {
        let v = raw
            .get(n)
            .ok_or_else(|| JsonError::Shape(format!("missing input {n}")))?;
        inputs.insert(n.clone(), value_from_json(prog, t, v)?);
    }
    if let Some(extra) = raw.keys().find(|k| scope.input_type(k).is_none()) {
        return shape(format!("unexpected input {extra}"));
    }
    let soft_tier = match field(j, "soft_tier")? {
        Json::Null => None,
        Json::String(s) => {
            Some(SoftTier::parse(s).ok_or_else(|| JsonError::Shape(format!("bad tier {s}")))?)
        }
        other => return shape(format!("bad tier {other}")),
    };
    let num = |k: &str| -> Result<u64, JsonError> {
        field(j, k)?
            .as_u64()
            .ok_or_else(|| JsonError::Shape(format!("{k} is not a count")))
    };
    Ok(StoredTest {
        scope: scope_name.to_string(),
        inputs,
        outcome: outcome_from_json(prog, scope, field(j, "outcome")?)?,
        path_fp: field(j, "path_fp")?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        soft_tier,
        iter: num("iter")?,
        solver_calls: num("solver_calls").unwrap_or(0),
        path: j
            .get("path")
            .and_then(Json::as_array)
            .map(|a| {
                a.iter()
                    .filter_map(|s| s.as_str().map(str::to_string))
                    .collect()
            })
            .unwrap_or_default(),
    })
}

fn stats_json(s: &Stats) -> Json {
    json!({
        "solver_calls": s.solver_calls,
        "sat": s.sat,
        "unsat": s.unsat,
        "unknown": s.unknown,
        "tests": s.tests,
        "conflicts": s.conflicts,
        "empties": s.empties,
        "iterations": s.iterations,
        "divergences": s.divergences,
        "violations": s.violations,
    })
}

pub fn test_file_name(i: usize) -> String {
    format!("test_{i:06}.json")
}

fn write(path: PathBuf, j: &Json) -> Result<PathBuf, JsonError> {
    let mut text = serde_json::to_string_pretty(j)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| JsonError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `test_%06d.json` per testcase and a `suite.json` manifest.
/// Returns the files written, manifest last.
pub fn emit_suite(suite: &TestSuite, dir: &Path) -> Result<Vec<PathBuf>, JsonError> {
    std::fs::create_dir_all(dir).map_err(|source| JsonError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for (i, t) in suite.tests.iter().enumerate() {
        files.push(write(
            dir.join(test_file_name(i)),
            &testcase_to_json(&StoredTest::of(t)),
        )?);
    }
    let manifest = json!({
        "scope": suite.scope,
        "complete": suite.complete,
        "stats": stats_json(&suite.stats),
        "tests": (0..suite.tests.len()).map(test_file_name).collect::<Vec<_>>(),
    });
    files.push(write(dir.join("suite.json"), &manifest)?);
    Ok(files)
}

pub fn read_json(path: &Path) -> Result<Json, JsonError> {
    let text = std::fs::read_to_string(path).map_err(|source| JsonError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// The testcase files of a directory, in name order.
pub fn test_files(dir: &Path) -> Result<Vec<PathBuf>, JsonError> {
    let rd = std::fs::read_dir(dir).map_err(|source| JsonError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("test_") && n.ends_with(".json"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_tests(prog: &Program, dir: &Path) -> Result<Vec<StoredTest>, JsonError> {
    test_files(dir)?
        .iter()
        .map(|p| testcase_from_json(prog, &read_json(p)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::{explore, Config, Opts};
    use crate::parser::parse;

    #[test]
    fn values_round_trip() {
        let prog = parse(
            "enum Z { A, B(money) } struct P { z: Z, k: rat }
             scope S { input p: P; input n: int; def y: int = n; output y; }",
        )
        .unwrap();
        let v = Value::Struct {
            ty: "P".into(),
            fields: vec![
                (
                    "z".into(),
                    Value::Enum {
                        ty: "Z".into(),
                        variant: "B".into(),
                        payload: Some(Box::new(Value::money_cents(-150))),
                    },
                ),
                ("k".into(), Value::rat(-3, 4)),
            ],
        };
        let j = value_to_json(&v);
        assert_eq!(
            j.to_string(),
            r#"{"fields":{"k":{"den":4,"num":-3},"z":{"enum":"Z","payload":{"cents":-150},"variant":"B"}},"struct":"P"}"#
        );
        assert_eq!(
            value_from_json(&prog, &SemType::Struct("P".into()), &j).unwrap(),
            v
        );
        let big = Value::Int("123456789012345678901234567890".parse().unwrap());
        assert_eq!(
            value_from_json(&prog, &SemType::Int, &value_to_json(&big)).unwrap(),
            big
        );
        assert!(value_from_json(&prog, &SemType::Bool, &json!(1)).is_err());
    }

    #[test]
    fn suite_files_are_stable() {
        let prog = parse(
            "scope Main { input b: bool; input x: int;
               def y: int = default <rule (b :- 1), rule (x == 0 :- 2)> (x > 0 :- 3);
               output y; }",
        )
        .unwrap();
        let suite = explore(&prog, "Main", &Config::with_opts(Opts::none())).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = emit_suite(&suite, a.path()).unwrap();
        emit_suite(&suite, b.path()).unwrap();
        assert_eq!(fa.len(), suite.tests.len() + 1);
        for f in &fa {
            let name = f.file_name().unwrap();
            assert_eq!(
                std::fs::read(f).unwrap(),
                std::fs::read(b.path().join(name)).unwrap()
            );
        }
        let loaded = load_tests(&prog, a.path()).unwrap();
        let direct: Vec<StoredTest> = suite.tests.iter().map(StoredTest::of).collect();
        assert_eq!(loaded, direct);
        let manifest = read_json(&a.path().join("suite.json")).unwrap();
        assert_eq!(manifest["stats"]["tests"], json!(loaded.len()));
    }
}
