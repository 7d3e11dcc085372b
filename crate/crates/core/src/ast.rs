//! Abstract syntax of the default calculus and program structure.

use std::fmt;

use crate::value::{SemType, Value};

/// Byte range into the source text. Synthesized nodes use `Span::DUMMY`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const DUMMY: Span = Span { start: 0, end: 0 };

    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    /// Binding power used by the parser and printer; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
    /// Rational to integer, halves away from zero.
    Round,
    /// Rational to integer, towards negative infinity.
    Floor,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// One or more variants sharing an arm. A binder is only allowed when a
    /// single variant carrying a payload is listed.
    Variants {
        names: Vec<String>,
        binder: Option<String>,
    },
    Wildcard,
}

impl Pattern {
    pub fn variant(name: &str) -> Pattern {
        Pattern::Variants {
            names: vec![name.to_string()],
            binder: None,
        }
    }

    pub fn binder(&self) -> Option<&str> {
        match self {
            Pattern::Variants { binder, .. } => binder.as_deref(),
            Pattern::Wildcard => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatchArm {
    pub pattern: Pattern,
    pub body: Expr,
}

/// An expression node. Equality and hashing ignore the span, so parsed and
/// synthesized trees compare structurally.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Var(String),
    Lit(Value),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Match(Box<Expr>, Vec<MatchArm>),
    StructMake(String, Vec<(String, Expr)>),
    FieldGet(Box<Expr>, String),
    EnumMake(String, String, Option<Box<Expr>>),
    Let(String, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    /// `⟨ exceptions | just :- cons ⟩`
    Default {
        exceptions: Vec<Expr>,
        just: Box<Expr>,
        cons: Box<Expr>,
    },
    /// `assert cond in body`: a failed check is a runtime error.
    Assert(Box<Expr>, Box<Expr>),
    /// A construct with concrete-only semantics, evaluated by a registered
    /// handler.
    Opaque(String, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    pub fn synth(kind: ExprKind) -> Expr {
        Expr::new(kind, Span::DUMMY)
    }

    pub fn var(name: &str) -> Expr {
        Expr::synth(ExprKind::Var(name.to_string()))
    }

    pub fn lit(v: Value) -> Expr {
        Expr::synth(ExprKind::Lit(v))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::lit(Value::Bool(b))
    }

    pub fn int(n: i64) -> Expr {
        Expr::lit(Value::int(n))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::synth(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::synth(ExprKind::Unary(UnOp::Not, Box::new(e)))
    }

    pub fn if_(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::synth(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)))
    }

    pub fn let_(name: &str, bound: Expr, body: Expr) -> Expr {
        Expr::synth(ExprKind::Let(
            name.to_string(),
            Box::new(bound),
            Box::new(body),
        ))
    }

    pub fn default(exceptions: Vec<Expr>, just: Expr, cons: Expr) -> Expr {
        Expr::synth(ExprKind::Default {
            exceptions,
            just: Box::new(just),
            cons: Box::new(cons),
        })
    }

    /// `⟨ | just :- cons ⟩`
    pub fn rule(just: Expr, cons: Expr) -> Expr {
        Expr::default(Vec::new(), just, cons)
    }

    pub fn enum_make(ty: &str, variant: &str, payload: Option<Expr>) -> Expr {
        Expr::synth(ExprKind::EnumMake(
            ty.to_string(),
            variant.to_string(),
            payload.map(Box::new),
        ))
    }

    pub fn match_(scrutinee: Expr, arms: Vec<MatchArm>) -> Expr {
        Expr::synth(ExprKind::Match(Box::new(scrutinee), arms))
    }

    /// Direct children, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Lit(_) => Vec::new(),
            ExprKind::Binary(_, l, r) => vec![l, r],
            ExprKind::Unary(_, e) | ExprKind::FieldGet(e, _) => vec![e],
            ExprKind::If(c, t, e) => vec![c, t, e],
            ExprKind::Match(s, arms) => {
                let mut v = vec![&**s];
                v.extend(arms.iter().map(|a| &a.body));
                v
            }
            ExprKind::StructMake(_, fields) => fields.iter().map(|(_, e)| e).collect(),
            ExprKind::EnumMake(_, _, p) => p.iter().map(|e| &**e).collect(),
            ExprKind::Let(_, b, body) => vec![b, body],
            ExprKind::Call(_, args) | ExprKind::Opaque(_, args) => args.iter().collect(),
            ExprKind::Default {
                exceptions,
                just,
                cons,
            } => {
                let mut v: Vec<&Expr> = exceptions.iter().collect();
                v.push(just);
                v.push(cons);
                v
            }
            ExprKind::Assert(c, e) => vec![c, e],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Var(_) | ExprKind::Lit(_) => Vec::new(),
            ExprKind::Binary(_, l, r) => vec![&mut **l, &mut **r],
            ExprKind::Unary(_, e) | ExprKind::FieldGet(e, _) => vec![&mut **e],
            ExprKind::If(c, t, e) => vec![&mut **c, &mut **t, &mut **e],
            ExprKind::Match(s, arms) => {
                let mut v = vec![&mut **s];
                v.extend(arms.iter_mut().map(|a| &mut a.body));
                v
            }
            ExprKind::StructMake(_, fields) => fields.iter_mut().map(|(_, e)| e).collect(),
            ExprKind::EnumMake(_, _, p) => p.iter_mut().map(|e| &mut **e).collect(),
            ExprKind::Let(_, b, body) => vec![&mut **b, &mut **body],
            ExprKind::Call(_, args) | ExprKind::Opaque(_, args) => args.iter_mut().collect(),
            ExprKind::Default {
                exceptions,
                just,
                cons,
            } => {
                let mut v: Vec<&mut Expr> = exceptions.iter_mut().collect();
                v.push(&mut **just);
                v.push(&mut **cons);
                v
            }
            ExprKind::Assert(c, e) => vec![&mut **c, &mut **e],
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn count_defaults(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::Default { .. }) {
                n += 1;
            }
        });
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub name: String,
    pub payload: Option<SemType>,
}

#[derive(Clone, Debug)]
pub struct EnumDecl {
    pub name: String,
    pub variants: Vec<Variant>,
    pub span: Span,
}

impl EnumDecl {
    pub fn variant(&self, name: &str) -> Option<&Variant> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn variant_names(&self) -> Vec<String> {
        self.variants.iter().map(|v| v.name.clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct StructDecl {
    pub name: String,
    pub fields: Vec<(String, SemType)>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<(String, SemType)>,
    pub ret: SemType,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Binding {
    pub name: String,
    pub ty: SemType,
    pub expr: Expr,
    pub span: Span,
}

/// A scope: typed inputs, input-space assertions, ordered bindings, outputs.
#[derive(Clone, Debug)]
pub struct Scope {
    pub name: String,
    pub inputs: Vec<(String, SemType)>,
    pub assertions: Vec<Expr>,
    pub bindings: Vec<Binding>,
    pub outputs: Vec<String>,
    pub span: Span,
}

impl Scope {
    pub fn input_type(&self, name: &str) -> Option<&SemType> {
        self.inputs.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == name)
    }

    /// Type of an output: the binding's declared type, or the input's.
    pub fn output_type(&self, name: &str) -> Option<&SemType> {
        self.binding(name)
            .map(|b| &b.ty)
            .or_else(|| self.input_type(name))
    }
}

/// Structural equality for declarations that carry a span.
macro_rules! eq_ignoring_span {
    ($ty:ident { $($field:ident),* }) => {
        impl PartialEq for $ty {
            fn eq(&self, other: &$ty) -> bool {
                true $(&& self.$field == other.$field)*
            }
        }
        impl Eq for $ty {}
    };
}

eq_ignoring_span!(EnumDecl { name, variants });
eq_ignoring_span!(StructDecl { name, fields });
eq_ignoring_span!(FunctionDecl {
    name,
    params,
    ret,
    body
});
eq_ignoring_span!(Binding { name, ty, expr });
eq_ignoring_span!(Scope {
    name,
    inputs,
    assertions,
    bindings,
    outputs
});

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub enums: Vec<EnumDecl>,
    pub structs: Vec<StructDecl>,
    pub functions: Vec<FunctionDecl>,
    pub scopes: Vec<Scope>,
}

impl Program {
    pub fn enum_decl(&self, name: &str) -> Option<&EnumDecl> {
        self.enums.iter().find(|e| e.name == name)
    }

    pub fn struct_decl(&self, name: &str) -> Option<&StructDecl> {
        self.structs.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn scope(&self, name: &str) -> Option<&Scope> {
        self.scopes.iter().find(|s| s.name == name)
    }

    /// Every expression root in the program: function bodies, then for each
    /// scope its assertions and binding bodies.
    pub fn roots(&self) -> Vec<&Expr> {
        let mut out: Vec<&Expr> = self.functions.iter().map(|f| &f.body).collect();
        for s in &self.scopes {
            out.extend(s.assertions.iter());
            out.extend(s.bindings.iter().map(|b| &b.expr));
        }
        out
    }

    pub fn roots_mut(&mut self) -> Vec<&mut Expr> {
        let mut out: Vec<&mut Expr> = self.functions.iter_mut().map(|f| &mut f.body).collect();
        for s in &mut self.scopes {
            out.extend(s.assertions.iter_mut());
            out.extend(s.bindings.iter_mut().map(|b| &mut b.expr));
        }
        out
    }

    pub fn count_defaults(&self) -> usize {
        self.roots().iter().map(|e| e.count_defaults()).sum()
    }
}
