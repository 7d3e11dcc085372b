//! Surface syntax: lexing, parsing and canonical printing of `.dfc` programs.

mod lexer;
#[allow(clippy::module_inception)]
mod parser;
mod printer;

use std::fmt;
use std::path::{Path, PathBuf};

use crate::ast::{Program, Span};
use crate::interp::{eval, value_has_type, Env, Mode};
use crate::value::{SemType, Value};

pub use lexer::KEYWORDS;
pub use parser::parse;
pub use printer::{print_expr, print_program, print_type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// A source file with a line table for rendering diagnostics.
#[derive(Clone, Debug)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: String,
    line_starts: Vec<usize>,
}

impl SourceUnit {
    pub fn new(path: impl Into<PathBuf>, text: String) -> SourceUnit {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        SourceUnit {
            path: path.into(),
            text,
            line_starts,
        }
    }

    pub fn load(path: &Path) -> std::io::Result<SourceUnit> {
        Ok(SourceUnit::new(path, std::fs::read_to_string(path)?))
    }

    /// One-based line and column of a byte offset, clamped to the text.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        (line + 1, offset - self.line_starts[line] + 1)
    }

    pub fn render(&self, d: &Diagnostic) -> String {
        let (line, col) = self.line_col(d.span.start);
        format!("{}:{line}:{col}: {}", self.path.display(), d.message)
    }

    pub fn parse(&self) -> Result<Program, Vec<Diagnostic>> {
        parse(&self.text)
    }
}

/// Reads a constant in source syntax, such as `$1,500`, `-3`, `15%` or
/// `Zone::Urban`, as a value of type `ty`.
pub fn parse_value(prog: &Program, ty: &SemType, text: &str) -> Result<Value, String> {
    let wrapped = parse(&format!("scope V {{ def v: int = {text}; }}"))
        .map_err(|ds| format!("cannot read `{text}`: {}", ds[0].message))?;
    let [scope] = wrapped.scopes.as_slice() else {
        return Err(format!("cannot read `{text}`"));
    };
    let [binding] = scope.bindings.as_slice() else {
        return Err(format!("cannot read `{text}`"));
    };
    let v = eval(prog, &binding.expr, &Env::new(), Mode::Eager);
    if value_has_type(prog, &v, ty) {
        Ok(v)
    } else {
        Err(format!("`{text}` is not a constant of type {ty}"))
    }
}
