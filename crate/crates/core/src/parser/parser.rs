//! Recursive-descent parser. Errors are collected; after an error the parser
//! resynchronizes at the next `;` or closing brace, so one run reports every
//! independent mistake.

use crate::ast::*;
use crate::value::{SemType, Value};

use super::lexer::{lex, Kw, Tok, Token};
use super::Diagnostic;

const MAX_DEPTH: usize = 96;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    depth: usize,
}

type PResult<T> = Result<T, ()>;

/// Parses a complete program.
pub fn parse(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let (toks, diags) = lex(src);
    let mut p = Parser {
        toks,
        pos: 0,
        diags,
        depth: 0,
    };
    let mut prog = p.program();
    resolve_type_names(&mut prog);
    if p.diags.is_empty() {
        Ok(prog)
    } else {
        Err(p.diags)
    }
}

/// Type names parse as enums; names declared as structures are rewritten.
fn resolve_type_names(prog: &mut Program) {
    let structs: Vec<String> = prog.structs.iter().map(|s| s.name.clone()).collect();
    let fix = |t: &mut SemType| fix_type(t, &structs);
    for e in &mut prog.enums {
        for v in &mut e.variants {
            if let Some(t) = &mut v.payload {
                fix(t);
            }
        }
    }
    for s in &mut prog.structs {
        for (_, t) in &mut s.fields {
            fix(t);
        }
    }
    for f in &mut prog.functions {
        for (_, t) in &mut f.params {
            fix(t);
        }
        fix(&mut f.ret);
    }
    for s in &mut prog.scopes {
        for (_, t) in &mut s.inputs {
            fix(t);
        }
        for b in &mut s.bindings {
            fix(&mut b.ty);
        }
    }
}

fn fix_type(t: &mut SemType, structs: &[String]) {
    match t {
        SemType::Enum(n) if structs.contains(n) => *t = SemType::Struct(n.clone()),
        SemType::Func(ps, r) => {
            for p in ps {
                fix_type(p, structs);
            }
            fix_type(r, structs);
        }
        _ => {}
    }
}

fn binop_of(tok: &Tok) -> Option<BinOp> {
    Some(match tok {
        Tok::Sym("+") => BinOp::Add,
        Tok::Sym("-") => BinOp::Sub,
        Tok::Sym("*") => BinOp::Mul,
        Tok::Sym("/") => BinOp::Div,
        Tok::Sym("==") => BinOp::Eq,
        Tok::Sym("!=") => BinOp::Ne,
        Tok::Sym("<") => BinOp::Lt,
        Tok::Sym("<=") => BinOp::Le,
        Tok::Sym(">") => BinOp::Gt,
        Tok::Sym(">=") => BinOp::Ge,
        Tok::Sym("&&") => BinOp::And,
        Tok::Sym("||") => BinOp::Or,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, k: Kw) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&mut self, msg: impl Into<String>) -> PResult<T> {
        let span = self.span();
        self.diags.push(Diagnostic::new(span, msg));
        Err(())
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Rat(q) => format!("`{q}`"),
            Tok::Money(_) => "money literal".to_string(),
            Tok::Kw(k) => format!("keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            let found = self.describe();
            self.error(format!("expected `{s}`, found {found}"))
        }
    }

    fn expect_kw(&mut self, k: Kw) -> PResult<()> {
        if self.at_kw(k) {
            self.bump();
            Ok(())
        } else {
            let found = self.describe();
            let name = format!("{k:?}").to_lowercase();
            self.error(format!("expected `{name}`, found {found}"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        if let Tok::Ident(s) = self.peek() {
            let s = s.clone();
            self.bump();
            Ok(s)
        } else {
            let found = self.describe();
            self.error(format!("expected identifier, found {found}"))
        }
    }

    /// Skips to just after the next `;` at brace depth zero, or to (not past)
    /// the `}` closing the current block.
    fn sync_item(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Sym("{") | Tok::Sym("(") => depth += 1,
                Tok::Sym("}") | Tok::Sym(")") => {
                    if depth == 0 {
                        if self.at_sym(")") {
                            self.bump();
                            continue;
                        }
                        return;
                    }
                    depth -= 1;
                }
                Tok::Sym(";") if depth == 0 => {
                    self.bump();
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    /// Skips to the next top-level declaration keyword.
    fn sync_top(&mut self) {
        while !matches!(
            self.peek(),
            Tok::Eof
                | Tok::Kw(Kw::Scope)
                | Tok::Kw(Kw::Enum)
                | Tok::Kw(Kw::Struct)
                | Tok::Kw(Kw::Fn)
        ) {
            self.bump();
        }
    }

    fn program(&mut self) -> Program {
        let mut prog = Program::default();
        loop {
            let ok = match self.peek() {
                Tok::Eof => break,
                Tok::Kw(Kw::Enum) => self.enum_decl().map(|d| prog.enums.push(d)),
                Tok::Kw(Kw::Struct) => self.struct_decl().map(|d| prog.structs.push(d)),
                Tok::Kw(Kw::Fn) => self.fn_decl().map(|d| prog.functions.push(d)),
                Tok::Kw(Kw::Scope) => self.scope_decl().map(|d| prog.scopes.push(d)),
                _ => {
                    let found = self.describe();
                    self.error::<()>(format!(
                        "expected `scope`, `enum`, `struct` or `fn`, found {found}"
                    ))
                }
            };
            if ok.is_err() {
                self.bump();
                self.sync_top();
            }
        }
        prog
    }

    fn ty(&mut self) -> PResult<SemType> {
        let name = self.ident()?;
        Ok(match name.as_str() {
            "bool" => SemType::Bool,
            "int" => SemType::Int,
            "rat" | "rate" | "decimal" => SemType::Rat,
            "money" => SemType::Money,
            _ => SemType::Enum(name),
        })
    }

    fn enum_decl(&mut self) -> PResult<EnumDecl> {
        let start = self.span().start;
        self.expect_kw(Kw::Enum)?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut variants = Vec::new();
        while !self.at_sym("}") {
            let vname = self.ident()?;
            let payload = if self.eat_sym("(") {
                let t = self.ty()?;
                self.expect_sym(")")?;
                Some(t)
            } else {
                None
            };
            variants.push(Variant {
                name: vname,
                payload,
            });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(EnumDecl {
            name,
            variants,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn struct_decl(&mut self) -> PResult<StructDecl> {
        let start = self.span().start;
        self.expect_kw(Kw::Struct)?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.at_sym("}") {
            let f = self.ident()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            fields.push((f, t));
            if !self.eat_sym(",") && !self.eat_sym(";") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(StructDecl {
            name,
            fields,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn fn_decl(&mut self) -> PResult<FunctionDecl> {
        let start = self.span().start;
        self.expect_kw(Kw::Fn)?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        while !self.at_sym(")") {
            let p = self.ident()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            params.push((p, t));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("->")?;
        let ret = self.ty()?;
        self.expect_sym("{")?;
        let body = self.expr()?;
        self.expect_sym("}")?;
        Ok(FunctionDecl {
            name,
            params,
            ret,
            body,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn scope_decl(&mut self) -> PResult<Scope> {
        let start = self.span().start;
        self.expect_kw(Kw::Scope)?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut scope = Scope {
            name,
            inputs: Vec::new(),
            assertions: Vec::new(),
            bindings: Vec::new(),
            outputs: Vec::new(),
            span: Span::DUMMY,
        };
        while !self.at_sym("}") && !matches!(self.peek(), Tok::Eof) {
            if self.scope_item(&mut scope).is_err() {
                self.sync_item();
            }
        }
        self.expect_sym("}")?;
        scope.span = Span::new(start, self.prev_end());
        Ok(scope)
    }

    fn end_item(&mut self) -> PResult<()> {
        if self.eat_sym(";") || self.at_sym("}") {
            Ok(())
        } else {
            let found = self.describe();
            self.error(format!("expected `;`, found {found}"))
        }
    }

    fn scope_item(&mut self, scope: &mut Scope) -> PResult<()> {
        let start = self.span().start;
        match self.peek() {
            Tok::Kw(Kw::Input) => {
                self.bump();
                let n = self.ident()?;
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.end_item()?;
                scope.inputs.push((n, t));
            }
            Tok::Kw(Kw::Assert) => {
                self.bump();
                let e = self.expr()?;
                self.end_item()?;
                scope.assertions.push(e);
            }
            Tok::Kw(Kw::Def) => {
                self.bump();
                let n = self.ident()?;
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.expect_sym("=")?;
                let e = self.expr()?;
                let span = Span::new(start, self.prev_end());
                self.end_item()?;
                scope.bindings.push(Binding {
                    name: n,
                    ty: t,
                    expr: e,
                    span,
                });
            }
            Tok::Kw(Kw::Output) => {
                self.bump();
                loop {
                    let n = self.ident()?;
                    scope.outputs.push(n);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.end_item()?;
            }
            _ => {
                let found = self.describe();
                return self.error(format!(
                    "expected `input`, `assert`, `def` or `output`, found {found}"
                ));
            }
        }
        Ok(())
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return self.error("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.expr_with(false)
    }

    fn expr_with(&mut self, no_struct: bool) -> PResult<Expr> {
        self.enter()?;
        let r = self.binary(1, no_struct);
        self.depth -= 1;
        r
    }

    fn binary(&mut self, min_prec: u8, no_struct: bool) -> PResult<Expr> {
        let mut lhs = self.unary(no_struct)?;
        let outer = self.depth;
        let r = loop {
            let Some(op) = binop_of(self.peek()) else {
                break Ok(lhs);
            };
            let prec = op.precedence();
            if prec < min_prec {
                break Ok(lhs);
            }
            self.bump();
            // Left-nested chains deepen the tree as much as nesting does.
            if self.enter().is_err() {
                break Err(());
            }
            let rhs = match self.binary(prec + 1, no_struct) {
                Ok(r) => r,
                Err(()) => break Err(()),
            };
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        };
        self.depth = outer;
        r
    }

    fn unary(&mut self, no_struct: bool) -> PResult<Expr> {
        self.enter()?;
        let r = self.unary_inner(no_struct);
        self.depth -= 1;
        r
    }

    fn unary_inner(&mut self, no_struct: bool) -> PResult<Expr> {
        let start = self.span().start;
        if self.at_kw(Kw::Not) {
            self.bump();
            let e = self.unary(no_struct)?;
            let span = Span::new(start, e.span.end);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span));
        }
        if self.at_sym("-") {
            self.bump();
            let lit = match self.peek() {
                Tok::Int(n) => Some(Value::Int(-n.clone())),
                Tok::Rat(q) => Some(Value::Rat(-q.clone())),
                Tok::Money(c) => Some(Value::Money(-c.clone())),
                _ => None,
            };
            if let Some(v) = lit {
                let t = self.bump();
                let e = Expr::new(ExprKind::Lit(v), Span::new(start, t.span.end));
                return self.postfix(e);
            }
            let e = self.unary(no_struct)?;
            let span = Span::new(start, e.span.end);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span));
        }
        let e = self.primary(no_struct)?;
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        let outer = self.depth;
        let mut r = Ok(());
        while r.is_ok() && self.at_sym(".") {
            self.bump();
            r = self.enter().and_then(|_| self.ident()).map(|f| {
                let span = Span::new(e.span.start, self.prev_end());
                let base = std::mem::replace(&mut e, Expr::bool(false));
                e = Expr::new(ExprKind::FieldGet(Box::new(base), f), span);
            });
        }
        self.depth = outer;
        r.map(|_| e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        while !self.at_sym(")") {
            args.push(self.expr()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn primary(&mut self, no_struct: bool) -> PResult<Expr> {
        let start = self.span().start;
        let fin = |p: &Parser, k: ExprKind| Expr::new(k, Span::new(start, p.prev_end()));
        let tok = self.peek().clone();
        match tok {
            Tok::Int(n) => {
                self.bump();
                Ok(fin(self, ExprKind::Lit(Value::Int(n))))
            }
            Tok::Rat(q) => {
                self.bump();
                Ok(fin(self, ExprKind::Lit(Value::Rat(q))))
            }
            Tok::Money(c) => {
                self.bump();
                Ok(fin(self, ExprKind::Lit(Value::Money(c))))
            }
            Tok::Kw(Kw::True) | Tok::Kw(Kw::False) => {
                self.bump();
                Ok(fin(
                    self,
                    ExprKind::Lit(Value::Bool(tok == Tok::Kw(Kw::True))),
                ))
            }
            Tok::Kw(Kw::Empty) => {
                self.bump();
                Ok(fin(self, ExprKind::Lit(Value::Empty)))
            }
            Tok::Kw(Kw::Conflict) => {
                self.bump();
                Ok(fin(self, ExprKind::Lit(Value::Conflict)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Kw(Kw::Round) | Tok::Kw(Kw::Floor) => {
                self.bump();
                let op = if tok == Tok::Kw(Kw::Round) {
                    UnOp::Round
                } else {
                    UnOp::Floor
                };
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(fin(self, ExprKind::Unary(op, Box::new(e))))
            }
            Tok::Sym("@") => {
                self.bump();
                let tag = self.ident()?;
                let args = self.args()?;
                Ok(fin(self, ExprKind::Opaque(tag, args)))
            }
            Tok::Kw(Kw::Default) => {
                self.bump();
                self.expect_sym("<")?;
                let mut exceptions = Vec::new();
                while !self.at_sym(">") {
                    exceptions.push(self.unary(false)?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(">")?;
                let (just, cons) = self.just_cons()?;
                Ok(fin(
                    self,
                    ExprKind::Default {
                        exceptions,
                        just: Box::new(just),
                        cons: Box::new(cons),
                    },
                ))
            }
            Tok::Kw(Kw::Rule) => {
                self.bump();
                let (just, cons) = self.just_cons()?;
                Ok(fin(
                    self,
                    ExprKind::Default {
                        exceptions: Vec::new(),
                        just: Box::new(just),
                        cons: Box::new(cons),
                    },
                ))
            }
            Tok::Kw(Kw::If) => {
                self.bump();
                let c = self.expr()?;
                self.expect_kw(Kw::Then)?;
                let t = self.expr()?;
                self.expect_kw(Kw::Else)?;
                let e = self.expr()?;
                Ok(fin(
                    self,
                    ExprKind::If(Box::new(c), Box::new(t), Box::new(e)),
                ))
            }
            Tok::Kw(Kw::Let) => {
                self.bump();
                let x = self.ident()?;
                self.expect_sym("=")?;
                let b = self.expr()?;
                self.expect_kw(Kw::In)?;
                let body = self.expr()?;
                Ok(fin(self, ExprKind::Let(x, Box::new(b), Box::new(body))))
            }
            Tok::Kw(Kw::Assert) => {
                self.bump();
                let c = self.expr()?;
                self.expect_kw(Kw::In)?;
                let body = self.expr()?;
                Ok(fin(self, ExprKind::Assert(Box::new(c), Box::new(body))))
            }
            Tok::Kw(Kw::Match) => {
                self.bump();
                let scrut = self.expr_with(true)?;
                self.expect_sym("{")?;
                let mut arms = Vec::new();
                while !self.at_sym("}") {
                    let pattern = self.pattern()?;
                    self.expect_sym("=>")?;
                    let body = self.expr()?;
                    arms.push(MatchArm { pattern, body });
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(fin(self, ExprKind::Match(Box::new(scrut), arms)))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at_sym("::") {
                    self.bump();
                    let variant = self.ident()?;
                    let payload = if self.at_sym("(") {
                        self.bump();
                        let e = self.expr()?;
                        self.expect_sym(")")?;
                        Some(Box::new(e))
                    } else {
                        None
                    };
                    return Ok(fin(self, ExprKind::EnumMake(name, variant, payload)));
                }
                if self.at_sym("(") {
                    let args = self.args()?;
                    return Ok(fin(self, ExprKind::Call(name, args)));
                }
                if self.at_sym("{") && !no_struct {
                    self.bump();
                    let mut fields = Vec::new();
                    while !self.at_sym("}") {
                        let f = self.ident()?;
                        self.expect_sym(":")?;
                        let e = self.expr()?;
                        fields.push((f, e));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym("}")?;
                    return Ok(fin(self, ExprKind::StructMake(name, fields)));
                }
                Ok(fin(self, ExprKind::Var(name)))
            }
            _ => {
                let found = self.describe();
                self.error(format!("expected expression, found {found}"))
            }
        }
    }

    fn just_cons(&mut self) -> PResult<(Expr, Expr)> {
        self.expect_sym("(")?;
        let just = self.expr()?;
        self.expect_sym(":-")?;
        let cons = self.expr()?;
        self.expect_sym(")")?;
        Ok((just, cons))
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if self.eat_sym("_") {
            return Ok(Pattern::Wildcard);
        }
        let mut names = vec![self.ident()?];
        let mut binder = None;
        if let Tok::Ident(b) = self.peek() {
            if !matches!(self.peek_at(1), Tok::Sym("|")) {
                binder = Some(b.clone());
                self.bump();
            }
        }
        while binder.is_none() && self.eat_sym("|") {
            names.push(self.ident()?);
        }
        Ok(Pattern::Variants { names, binder })
    }
}
