//! Tokenizer for `.dfc` sources. Numbers are lexed exactly: money literals
//! become integer cents and decimals and percentages become rationals.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::ast::Span;

use super::Diagnostic;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Rat(BigRational),
    Money(BigInt),
    Kw(Kw),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Scope,
    Input,
    Assert,
    Def,
    Output,
    Default,
    Rule,
    Match,
    If,
    Then,
    Else,
    Let,
    In,
    True,
    False,
    Enum,
    Struct,
    Fn,
    Not,
    Empty,
    Conflict,
    Round,
    Floor,
}

fn keyword(s: &str) -> Option<Kw> {
    Some(match s {
        "scope" => Kw::Scope,
        "input" => Kw::Input,
        "assert" => Kw::Assert,
        "def" => Kw::Def,
        "output" => Kw::Output,
        "default" => Kw::Default,
        "rule" => Kw::Rule,
        "match" => Kw::Match,
        "if" => Kw::If,
        "then" => Kw::Then,
        "else" => Kw::Else,
        "let" => Kw::Let,
        "in" => Kw::In,
        "true" => Kw::True,
        "false" => Kw::False,
        "enum" => Kw::Enum,
        "struct" => Kw::Struct,
        "fn" => Kw::Fn,
        "not" => Kw::Not,
        "empty" => Kw::Empty,
        "conflict" => Kw::Conflict,
        "round" => Kw::Round,
        "floor" => Kw::Floor,
        _ => return None,
    })
}

pub const KEYWORDS: &[&str] = &[
    "scope", "input", "assert", "def", "output", "default", "rule", "match", "if", "then", "else",
    "let", "in", "true", "false", "enum", "struct", "fn", "not", "empty", "conflict", "round",
    "floor",
];

const SYMBOLS: &[&str] = &[
    "::", ":-", "==", "!=", "<=", ">=", "&&", "||", "=>", "->", "{", "}", "(", ")", "<", ">", ",",
    ";", ":", "=", "+", "-", "*", "/", ".", "|", "_", "@",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn digits_value(s: &str) -> BigInt {
    s.bytes()
        .fold(BigInt::zero(), |acc, d| acc * 10 + BigInt::from(d - b'0'))
}

/// Tokenizes the whole input. Unknown characters produce a diagnostic and
/// are skipped, so lexing always reaches the end.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let mut i = 0;
    let digits_from = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic()
            || (c == b'_' && i + 1 < bytes.len() && is_ident_byte(bytes[i + 1]))
        {
            while i < bytes.len() && is_ident_byte(bytes[i]) {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match keyword(word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            };
            toks.push(Token {
                tok,
                span: Span::new(start, i),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let end = digits_from(i);
            let whole = digits_value(&src[i..end]);
            i = end;
            let tok = if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                let fend = digits_from(i + 1);
                let frac = &src[i + 1..fend];
                let den = num::pow(BigInt::from(10), frac.len());
                let num = whole * &den + digits_value(frac);
                i = fend;
                Tok::Rat(BigRational::new(num, den))
            } else if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                let dend = digits_from(i + 1);
                let den = digits_value(&src[i + 1..dend]);
                if den.is_zero() {
                    Tok::Int(whole)
                } else {
                    i = dend;
                    Tok::Rat(BigRational::new(whole, den))
                }
            } else {
                Tok::Int(whole)
            };
            let tok = if i < bytes.len() && bytes[i] == b'%' {
                i += 1;
                match tok {
                    Tok::Int(n) => Tok::Rat(BigRational::new(n, BigInt::from(100))),
                    Tok::Rat(q) => Tok::Rat(q / BigRational::from_integer(BigInt::from(100))),
                    t => t,
                }
            } else {
                tok
            };
            toks.push(Token {
                tok,
                span: Span::new(start, i),
            });
            continue;
        }
        if c == b'$' {
            match lex_money(src, i + 1) {
                Ok((cents, end)) => {
                    i = end;
                    toks.push(Token {
                        tok: Tok::Money(cents),
                        span: Span::new(start, i),
                    });
                }
                Err(end) => {
                    i = end.max(i + 1);
                    diags.push(Diagnostic::new(
                        Span::new(start, i),
                        "malformed money literal",
                    ));
                }
            }
            continue;
        }
        if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += sym.len();
            toks.push(Token {
                tok: Tok::Sym(sym),
                span: Span::new(start, i),
            });
            continue;
        }
        let ch_len = src[i..].chars().next().map(|ch| ch.len_utf8()).unwrap_or(1);
        i += ch_len;
        diags.push(Diagnostic::new(
            Span::new(start, i),
            format!("unexpected character `{}`", &src[start..i]),
        ));
    }
    toks.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    (toks, diags)
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Lexes `d[,ddd]*[.c[c]]` starting at `i`, returning cents and end offset.
fn lex_money(src: &str, mut i: usize) -> Result<(BigInt, usize), usize> {
    let bytes = src.as_bytes();
    let mut units = String::new();
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        units.push(bytes[i] as char);
        i += 1;
    }
    if units.is_empty() {
        return Err(i);
    }
    while i + 4 <= bytes.len()
        && bytes[i] == b','
        && bytes[i + 1..i + 4].iter().all(|b| b.is_ascii_digit())
        && !(i + 4 < bytes.len() && bytes[i + 4].is_ascii_digit())
    {
        units.push_str(&src[i + 1..i + 4]);
        i += 4;
    }
    let mut cents = digits_value(&units) * 100;
    if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
        let mut j = i + 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        let frac = &src[i + 1..j];
        if frac.len() > 2 {
            return Err(j);
        }
        let f = digits_value(frac);
        cents += if frac.len() == 1 { f * 10 } else { f };
        i = j;
    }
    Ok((cents, i))
}
