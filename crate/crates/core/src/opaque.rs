//! Handlers for `@tag(...)` constructs. These have concrete semantics only:
//! the concolic evaluator runs them on concrete values and records that the
//! result was concretized.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::value::{SemType, Value};

pub trait OpaqueHandler: Send + Sync {
    fn result_type(&self, args: &[SemType]) -> Result<SemType, String>;

    /// `None` signals a handler failure, which evaluates to a conflict.
    fn eval(&self, args: &[Value]) -> Option<Value>;
}

#[derive(Clone, Default)]
pub struct OpaqueRegistry {
    handlers: BTreeMap<String, Arc<dyn OpaqueHandler>>,
}

impl std::fmt::Debug for OpaqueRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.handlers.keys()).finish()
    }
}

impl OpaqueRegistry {
    pub fn empty() -> OpaqueRegistry {
        OpaqueRegistry::default()
    }

    /// `@min`, `@max` over two or more numbers of one type, and `@abs`.
    pub fn standard() -> OpaqueRegistry {
        let mut r = OpaqueRegistry::empty();
        r.register("min", Arc::new(Extremum { max: false }));
        r.register("max", Arc::new(Extremum { max: true }));
        r.register("abs", Arc::new(Abs));
        r
    }

    pub fn register(&mut self, tag: &str, h: Arc<dyn OpaqueHandler>) {
        self.handlers.insert(tag.to_string(), h);
    }

    pub fn get(&self, tag: &str) -> Option<&dyn OpaqueHandler> {
        self.handlers.get(tag).map(|h| h.as_ref())
    }

    /// Evaluates a handler; unknown tags and failures give `Conflict`.
    pub fn eval(&self, tag: &str, args: &[Value]) -> Value {
        self.get(tag)
            .and_then(|h| h.eval(args))
            .unwrap_or(Value::Conflict)
    }
}

fn numeric_order(a: &Value, b: &Value) -> Option<std::cmp::Ordering> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) | (Value::Money(x), Value::Money(y)) => Some(x.cmp(y)),
        (Value::Rat(x), Value::Rat(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

struct Extremum {
    max: bool,
}

impl OpaqueHandler for Extremum {
    fn result_type(&self, args: &[SemType]) -> Result<SemType, String> {
        let Some(first) = args.first() else {
            return Err("expects at least one argument".into());
        };
        if !first.is_numeric() || args.iter().any(|t| t != first) {
            return Err("expects numbers of a single type".into());
        }
        Ok(first.clone())
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        let mut best = args.first()?.clone();
        for a in &args[1..] {
            let ord = numeric_order(a, &best)?;
            if (self.max && ord.is_gt()) || (!self.max && ord.is_lt()) {
                best = a.clone();
            }
        }
        Some(best)
    }
}

struct Abs;

impl OpaqueHandler for Abs {
    fn result_type(&self, args: &[SemType]) -> Result<SemType, String> {
        match args {
            [t] if t.is_numeric() => Ok(t.clone()),
            _ => Err("expects one number".into()),
        }
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        use num::Signed;
        match args {
            [Value::Int(n)] => Some(Value::Int(n.abs())),
            [Value::Money(n)] => Some(Value::Money(n.abs())),
            [Value::Rat(q)] => Some(Value::Rat(q.abs())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_handlers() {
        let r = OpaqueRegistry::standard();
        assert_eq!(
            r.eval("max", &[Value::int(3), Value::int(7), Value::int(-1)]),
            Value::int(7)
        );
        assert_eq!(
            r.eval("min", &[Value::money_cents(5), Value::money_cents(2)]),
            Value::money_cents(2)
        );
        assert_eq!(r.eval("abs", &[Value::rat(-1, 3)]), Value::rat(1, 3));
        assert_eq!(r.eval("nope", &[]), Value::Conflict);
        assert_eq!(
            r.eval("min", &[Value::int(1), Value::Bool(true)]),
            Value::Conflict
        );
        assert!(r
            .get("max")
            .unwrap()
            .result_type(&[SemType::Int, SemType::Rat])
            .is_err());
    }
}
