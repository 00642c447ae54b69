//! Abstract syntax of Stella programs.
//!
//! Every expression and pattern carries a [`Span`]. Spans compare equal
//! unconditionally, so `==` on syntax trees is equality modulo source
//! locations.

mod alias;
mod extension;
mod pretty;

use num_bigint::BigUint;

pub use self::alias::{resolve_alias, AliasMap};
pub use self::extension::{registry_lookup, Extension, ExtensionName, Lookup};
pub use self::pretty::{pretty_print, print_decl, print_expr, print_pattern, print_type};
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub language: String,
    /// Ordered set: the parser drops repeated names, keeping the first.
    pub extensions: Vec<ExtensionName>,
    pub decls: Vec<Decl>,
    pub span: Span,
}

impl Program {
    pub fn functions(&self) -> impl Iterator<Item = &FnDecl> {
        self.decls.iter().filter_map(|decl| match decl {
            Decl::Fn(f) => Some(f),
            _ => None,
        })
    }

    pub fn main(&self) -> Option<&FnDecl> {
        self.functions().find(|f| f.name == "main")
    }

    pub fn has_extension(&self, ext: Extension) -> bool {
        self.extensions.iter().any(|name| name.as_str() == ext.name())
    }

    /// Exception declarations (`exception type = T` and `exception variant l : T`),
    /// in source order.
    pub fn exception_decls(&self) -> impl Iterator<Item = &Decl> {
        self.decls
            .iter()
            .filter(|decl| matches!(decl, Decl::ExceptionType { .. } | Decl::ExceptionVariant { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Fn(FnDecl),
    TypeAlias { name: String, ty: Type, span: Span },
    ExceptionType { ty: Type, span: Span },
    ExceptionVariant { label: String, ty: Type, span: Span },
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Fn(f) => f.span,
            Decl::TypeAlias { span, .. }
            | Decl::ExceptionType { span, .. }
            | Decl::ExceptionVariant { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnDecl {
    pub name: String,
    /// Type parameters; non-empty exactly for `generic fn` declarations.
    pub generics: Vec<String>,
    pub params: Vec<Param>,
    pub ret: Type,
    pub nested: Vec<Decl>,
    pub body: Expr,
    pub span: Span,
}

impl FnDecl {
    pub fn is_generic(&self) -> bool {
        !self.generics.is_empty()
    }

    /// Type of the declared function as seen by callers.
    pub fn signature(&self) -> Type {
        let fn_ty = Type::Fn(
            self.params.iter().map(|p| p.ty.clone()).collect(),
            Box::new(self.ret.clone()),
        );
        if self.is_generic() {
            Type::Forall(self.generics.clone(), Box::new(fn_ty))
        } else {
            fn_ty
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Nat,
    Unit,
    Top,
    Bot,
    Fn(Vec<Type>, Box<Type>),
    Tuple(Vec<Type>),
    Record(Vec<(String, Type)>),
    Sum(Box<Type>, Box<Type>),
    Variant(Vec<(String, Type)>),
    List(Box<Type>),
    Ref(Box<Type>),
    Var(String),
    Forall(Vec<String>, Box<Type>),
    Mu(String, Box<Type>),
    /// Placeholder solved by type reconstruction. Written `auto` in source.
    Meta(u32),
    /// Reference to a `type` alias, expanded by [`resolve_alias`].
    Alias(String),
}

impl Type {
    pub fn func(params: Vec<Type>, ret: Type) -> Type {
        Type::Fn(params, Box::new(ret))
    }

    pub fn sum(left: Type, right: Type) -> Type {
        Type::Sum(Box::new(left), Box::new(right))
    }

    pub fn list(elem: Type) -> Type {
        Type::List(Box::new(elem))
    }

    pub fn reference(elem: Type) -> Type {
        Type::Ref(Box::new(elem))
    }

    pub fn var(name: &str) -> Type {
        Type::Var(name.to_string())
    }

    pub fn forall(binders: &[&str], body: Type) -> Type {
        Type::Forall(binders.iter().map(|b| b.to_string()).collect(), Box::new(body))
    }

    pub fn mu(binder: &str, body: Type) -> Type {
        Type::Mu(binder.to_string(), Box::new(body))
    }

    pub fn record(fields: &[(&str, Type)]) -> Type {
        Type::Record(fields.iter().map(|(l, t)| (l.to_string(), t.clone())).collect())
    }

    pub fn variant(fields: &[(&str, Type)]) -> Type {
        Type::Variant(fields.iter().map(|(l, t)| (l.to_string(), t.clone())).collect())
    }

    /// Immediate children, in left-to-right order.
    pub fn children(&self) -> Vec<&Type> {
        match self {
            Type::Bool
            | Type::Nat
            | Type::Unit
            | Type::Top
            | Type::Bot
            | Type::Var(_)
            | Type::Meta(_)
            | Type::Alias(_) => vec![],
            Type::Fn(params, ret) => params.iter().chain(std::iter::once(&**ret)).collect(),
            Type::Tuple(ts) => ts.iter().collect(),
            Type::Record(fs) | Type::Variant(fs) => fs.iter().map(|(_, t)| t).collect(),
            Type::Sum(l, r) => vec![l, r],
            Type::List(t) | Type::Ref(t) | Type::Forall(_, t) | Type::Mu(_, t) => vec![t],
        }
    }

    pub fn any(&self, pred: &impl Fn(&Type) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn contains_meta(&self) -> bool {
        self.any(&|t| matches!(t, Type::Meta(_)))
    }

    pub fn contains_alias(&self) -> bool {
        self.any(&|t| matches!(t, Type::Alias(_)))
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Type::size).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Expression with a dummy span, for building ASTs in code.
    pub fn synthetic(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::DUMMY }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetrecBinding {
    pub name: String,
    pub ty: Type,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchCase {
    pub pattern: Pattern,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    True,
    False,
    Unit,
    Zero,
    /// Decimal literal other than `0`.
    NatLiteral(BigUint),
    Succ(Box<Expr>),
    NatIsZero(Box<Expr>),
    NatPred(Box<Expr>),
    NatRec(Box<Expr>, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Abstraction {
        params: Vec<Param>,
        ret: Option<Type>,
        body: Box<Expr>,
    },
    GenericAbstraction {
        binders: Vec<String>,
        params: Vec<Param>,
        ret: Option<Type>,
        body: Box<Expr>,
    },
    Application(Box<Expr>, Vec<Expr>),
    TypeApplication(Box<Expr>, Vec<Type>),
    Tuple(Vec<Expr>),
    /// 1-based component index.
    TupleProj(Box<Expr>, usize),
    Record(Vec<(String, Expr)>),
    RecordProj(Box<Expr>, String),
    Inl(Box<Expr>),
    Inr(Box<Expr>),
    VariantInj(String, Box<Expr>),
    ListLiteral(Vec<Expr>),
    ConsList(Box<Expr>, Box<Expr>),
    ListHead(Box<Expr>),
    ListTail(Box<Expr>),
    ListIsEmpty(Box<Expr>),
    Match(Box<Expr>, Vec<MatchCase>),
    Let(Vec<(Pattern, Expr)>, Box<Expr>),
    LetRec(Vec<LetrecBinding>, Box<Expr>),
    Ascription(Box<Expr>, Type),
    Sequence(Box<Expr>, Box<Expr>),
    NewRef(Box<Expr>),
    Deref(Box<Expr>),
    Assign(Box<Expr>, Box<Expr>),
    Panic,
    Throw(Box<Expr>),
    TryWith(Box<Expr>, Box<Expr>),
    TryCatch(Box<Expr>, Pattern, Box<Expr>),
    CastAs(Box<Expr>, Type),
    Fix(Box<Expr>),
    Fold(Type, Box<Expr>),
    Unfold(Type, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub kind: PatternKind,
    pub span: Span,
}

impl Pattern {
    pub fn new(kind: PatternKind, span: Span) -> Pattern {
        Pattern { kind, span }
    }

    pub fn synthetic(kind: PatternKind) -> Pattern {
        Pattern { kind, span: Span::DUMMY }
    }

    pub fn is_binder(&self) -> bool {
        matches!(self.kind, PatternKind::Var(_) | PatternKind::Wildcard)
    }

    /// Sub-patterns directly under this pattern's head.
    pub fn children(&self) -> Vec<&Pattern> {
        match &self.kind {
            PatternKind::Var(_)
            | PatternKind::Wildcard
            | PatternKind::True
            | PatternKind::False
            | PatternKind::Zero
            | PatternKind::Unit
            | PatternKind::Int(_) => vec![],
            PatternKind::Succ(p)
            | PatternKind::Inl(p)
            | PatternKind::Inr(p)
            | PatternKind::Variant(_, p)
            | PatternKind::Ascription(p, _) => vec![p],
            PatternKind::Tuple(ps) | PatternKind::List(ps) => ps.iter().collect(),
            PatternKind::Record(fs) => fs.iter().map(|(_, p)| p).collect(),
            PatternKind::Cons(h, t) => vec![h, t],
        }
    }

    /// A pattern is simple when everything under its head constructor is a
    /// variable or wildcard. Only simple patterns are checked for
    /// exhaustiveness; anything deeper needs `#structural-patterns`.
    pub fn is_simple(&self) -> bool {
        self.children().into_iter().all(Pattern::is_binder)
    }

    /// Variables bound by the pattern, left to right (duplicates included).
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a Pattern, out: &mut Vec<&'a str>) {
            if let PatternKind::Var(name) = &p.kind {
                out.push(name);
            }
            for child in p.children() {
                walk(child, out);
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Var(String),
    Wildcard,
    True,
    False,
    Zero,
    Succ(Box<Pattern>),
    Unit,
    Inl(Box<Pattern>),
    Inr(Box<Pattern>),
    Variant(String, Box<Pattern>),
    Tuple(Vec<Pattern>),
    Record(Vec<(String, Pattern)>),
    List(Vec<Pattern>),
    Cons(Box<Pattern>, Box<Pattern>),
    Ascription(Box<Pattern>, Type),
    /// Decimal literal other than `0`.
    Int(BigUint),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(kind: PatternKind) -> Pattern {
        Pattern::synthetic(kind)
    }

    fn var(name: &str) -> Pattern {
        p(PatternKind::Var(name.into()))
    }

    /// Depth of constructor nesting; binders count as depth 0.
    fn constructor_depth(pat: &Pattern) -> usize {
        if pat.is_binder() {
            0
        } else {
            1 + pat.children().into_iter().map(constructor_depth).max().unwrap_or(0)
        }
    }

    #[test]
    fn simple_pattern_agrees_with_depth() {
        let samples = vec![
            var("x"),
            p(PatternKind::Wildcard),
            p(PatternKind::True),
            p(PatternKind::Succ(Box::new(var("k")))),
            p(PatternKind::Succ(Box::new(p(PatternKind::Succ(Box::new(var("m"))))))),
            p(PatternKind::Tuple(vec![var("a"), p(PatternKind::Wildcard)])),
            p(PatternKind::Tuple(vec![var("a"), p(PatternKind::Zero)])),
            p(PatternKind::Variant("value".into(), Box::new(var("n")))),
            p(PatternKind::Cons(Box::new(var("h")), Box::new(p(PatternKind::List(vec![]))))),
            p(PatternKind::List(vec![])),
        ];
        for pat in samples {
            assert_eq!(pat.is_simple(), constructor_depth(&pat) <= 1, "{pat:?}");
        }
    }

    #[test]
    fn pattern_variables_in_order() {
        let pat = p(PatternKind::Tuple(vec![var("a"), p(PatternKind::Inl(Box::new(var("b")))), var("a")]));
        assert_eq!(pat.variables(), vec!["a", "b", "a"]);
    }

    #[test]
    fn generic_signature_is_forall() {
        let f = FnDecl {
            name: "id".into(),
            generics: vec!["T".into()],
            params: vec![Param { name: "x".into(), ty: Type::var("T"), span: Span::DUMMY }],
            ret: Type::var("T"),
            nested: vec![],
            body: Expr::synthetic(ExprKind::Var("x".into())),
            span: Span::DUMMY,
        };
        assert_eq!(f.signature(), Type::forall(&["T"], Type::func(vec![Type::var("T")], Type::var("T"))));
    }
}
