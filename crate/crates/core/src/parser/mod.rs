//! Recursive-descent parser for Stella source text.
//!
//! Expression precedence, loosest first:
//!
//! | level   | forms                                             |
//! |---------|---------------------------------------------------|
//! | seq     | `e1; e2` (right associative), `let`, `letrec`     |
//! | assign  | `e1 := e2` (right associative), `if`              |
//! | cast    | `e as T`, `e cast as T` (postfix, left to right)  |
//! | unary   | `*e`, `fold[T] e`, `unfold[T] e`                  |
//! | postfix | `f(args)`, `f[Types]`, `e.1`, `e.label`           |
//!
//! `let`/`letrec` bodies extend as far right as possible; the `else`
//! branch of `if` is parsed at the assign level.

mod lexer;

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

pub use self::lexer::{is_keyword, tokenize, Token, TokenKind, KEYWORDS};
use crate::span::{Pos, Span};
use crate::syntax::{
    Decl, Expr, ExprKind, ExtensionName, FnDecl, LetrecBinding, MatchCase, Param, Pattern, PatternKind,
    Program, Type,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: Span) -> ParseError {
        ParseError { message: message.into(), span, expected: Vec::new() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.message, self.span)
    }
}

impl std::error::Error for ParseError {}

pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(source)?;
    let program = p.program()?;
    p.expect_eof()?;
    Ok(program)
}

pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_type(source: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(source)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_pattern(source: &str) -> Result<Pattern, ParseError> {
    let mut p = Parser::new(source)?;
    let pat = p.pattern()?;
    p.expect_eof()?;
    Ok(pat)
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Span,
    next_meta: u32,
}

impl Parser {
    fn new(source: &str) -> PResult<Parser> {
        let tokens = tokenize(source)?;
        let end = end_pos(source);
        Ok(Parser { tokens, pos: 0, eof: Span::new(end, end), next_meta: 0 })
    }

    // ----- token plumbing -------------------------------------------------

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    fn peek_span(&self) -> Span {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.eof
        } else {
            self.tokens[self.pos - 1].span
        }
    }

    fn is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text && t.kind != TokenKind::Identifier)
    }

    fn is_at(&self, n: usize, text: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.text == text && t.kind != TokenKind::Identifier)
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.is(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_expected(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("{t}"),
            None => "end of input".to_string(),
        };
        let list = expected.join(", ");
        ParseError {
            message: format!("expected {list}, found {found}"),
            span: self.peek_span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, text: &str) -> PResult<Span> {
        if self.is(text) {
            self.pos += 1;
            Ok(self.prev_span())
        } else {
            Err(self.error_expected(&[&format!("`{text}`")]))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error_expected(&["end of input"])),
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                let out = (t.text.clone(), t.span);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    fn integer(&mut self) -> PResult<(BigUint, Span)> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Integer => {
                let value = t.text.parse::<BigUint>().expect("lexer produced digits");
                let span = t.span;
                self.pos += 1;
                Ok((value, span))
            }
            _ => Err(self.error_expected(&["integer"])),
        }
    }

    fn comma_separated<T>(
        &mut self,
        close: &str,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut items = Vec::new();
        if self.eat(close) {
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            if self.eat(close) {
                return Ok(items);
            }
            if !self.eat(",") {
                return Err(self.error_expected(&["`,`", &format!("`{close}`")]));
            }
        }
    }

    // ----- program and declarations -------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let start = self.peek_span();
        if !self.is("language") {
            return Err(ParseError {
                message: "a program must start with a language declaration `language core;`".into(),
                span: self.peek_span(),
                expected: vec!["`language`".into()],
            });
        }
        self.pos += 1;
        self.expect("core")?;
        self.expect(";")?;
        let mut extensions: Vec<ExtensionName> = Vec::new();
        while self.eat("extend") {
            self.expect("with")?;
            loop {
                match self.peek() {
                    Some(t) if t.kind == TokenKind::ExtensionName => {
                        let name = ExtensionName::new(t.text.clone());
                        self.pos += 1;
                        if !extensions.contains(&name) {
                            extensions.push(name);
                        }
                    }
                    _ => return Err(self.error_expected(&["extension name"])),
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(";")?;
        }
        let mut decls = Vec::new();
        while self.peek().is_some() {
            decls.push(self.decl()?);
        }
        Ok(Program { language: "core".into(), extensions, decls, span: start.to(self.prev_span()) })
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.peek_span();
        if self.is("fn") || self.is("generic") {
            return Ok(Decl::Fn(self.fn_decl()?));
        }
        if self.eat("type") {
            let (name, _) = self.ident()?;
            self.expect("=")?;
            let ty = self.ty()?;
            self.eat(";");
            return Ok(Decl::TypeAlias { name, ty, span: start.to(self.prev_span()) });
        }
        if self.eat("exception") {
            if self.eat("type") {
                self.expect("=")?;
                let ty = self.ty()?;
                self.eat(";");
                return Ok(Decl::ExceptionType { ty, span: start.to(self.prev_span()) });
            }
            if self.eat("variant") {
                let (label, _) = self.ident()?;
                self.expect(":")?;
                let ty = self.ty()?;
                self.eat(";");
                return Ok(Decl::ExceptionVariant { label, ty, span: start.to(self.prev_span()) });
            }
            return Err(self.error_expected(&["`type`", "`variant`"]));
        }
        Err(self.error_expected(&["`fn`", "`generic`", "`type`", "`exception`"]))
    }

    fn fn_decl(&mut self) -> PResult<FnDecl> {
        let start = self.peek_span();
        let generic = self.eat("generic");
        self.expect("fn")?;
        let (name, _) = self.ident()?;
        let generics = if generic {
            self.expect("[")?;
            let binders = self.comma_separated("]", |p| p.ident().map(|(n, _)| n))?;
            if binders.is_empty() {
                return Err(ParseError::new("generic function needs at least one type parameter", self.prev_span()));
            }
            binders
        } else {
            Vec::new()
        };
        self.expect("(")?;
        let params = self.comma_separated(")", Self::param)?;
        self.expect("->")?;
        let ret = self.ty()?;
        self.expect("{")?;
        let mut nested = Vec::new();
        while !self.is("return") {
            if self.peek().is_none() {
                return Err(self.error_expected(&["`return`"]));
            }
            nested.push(self.decl()?);
        }
        self.expect("return")?;
        let body = self.expr()?;
        self.expect("}")?;
        Ok(FnDecl { name, generics, params, ret, nested, body, span: start.to(self.prev_span()) })
    }

    fn param(&mut self) -> PResult<Param> {
        let (name, span) = self.ident()?;
        self.expect(":")?;
        let ty = self.ty()?;
        Ok(Param { name, ty, span: span.to(self.prev_span()) })
    }

    // ----- types ------------------------------------------------------------

    fn ty(&mut self) -> PResult<Type> {
        if self.eat("fn") {
            self.expect("(")?;
            let params = self.comma_separated(")", Self::ty)?;
            self.expect("->")?;
            let ret = self.ty()?;
            return Ok(Type::Fn(params, Box::new(ret)));
        }
        if self.eat("forall") {
            let mut binders = vec![self.ident()?.0];
            while !self.is(".") {
                self.eat(",");
                binders.push(self.ident()?.0);
            }
            self.expect(".")?;
            let body = self.ty()?;
            return Ok(Type::Forall(binders, Box::new(body)));
        }
        if self.eat("µ") {
            let (binder, _) = self.ident()?;
            self.expect(".")?;
            let body = self.ty()?;
            return Ok(Type::Mu(binder, Box::new(body)));
        }
        let mut t = self.ty_atom()?;
        while self.eat("+") {
            let rhs = self.ty_atom()?;
            t = Type::sum(t, rhs);
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        let Some(tok) = self.peek() else {
            return Err(self.error_expected(&["type"]));
        };
        if tok.kind == TokenKind::Identifier {
            let name = tok.text.clone();
            self.pos += 1;
            return Ok(Type::Var(name));
        }
        let text = tok.text.clone();
        let simple = match text.as_str() {
            "Nat" => Some(Type::Nat),
            "Bool" => Some(Type::Bool),
            "Unit" => Some(Type::Unit),
            "Top" => Some(Type::Top),
            "Bot" => Some(Type::Bot),
            "auto" => {
                let id = self.next_meta;
                self.next_meta += 1;
                Some(Type::Meta(id))
            }
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok(t);
        }
        match text.as_str() {
            "fn" | "forall" | "µ" => self.ty(),
            "(" => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect(")")?;
                Ok(t)
            }
            "&" => {
                self.pos += 1;
                Ok(Type::reference(self.ty_atom()?))
            }
            "[" => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect("]")?;
                Ok(Type::list(t))
            }
            "<|" => {
                self.pos += 1;
                let fields = self.comma_separated("|>", |p| {
                    let (label, _) = p.ident()?;
                    p.expect(":")?;
                    Ok((label, p.ty()?))
                })?;
                Ok(Type::Variant(fields))
            }
            "{" => {
                self.pos += 1;
                let is_record = self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) && self.is_at(1, ":");
                if is_record {
                    let fields = self.comma_separated("}", |p| {
                        let (label, _) = p.ident()?;
                        p.expect(":")?;
                        Ok((label, p.ty()?))
                    })?;
                    Ok(Type::Record(fields))
                } else {
                    Ok(Type::Tuple(self.comma_separated("}", Self::ty)?))
                }
            }
            _ => Err(self.error_expected(&["type"])),
        }
    }

    // ----- expressions ------------------------------------------------------

    fn starts_expr(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        match t.kind {
            TokenKind::Identifier | TokenKind::Integer => true,
            TokenKind::ExtensionName => false,
            TokenKind::Keyword => !matches!(
                t.text.as_str(),
                "then" | "else" | "in" | "with" | "catch" | "as" | "cast" | "return" | "language" | "extend"
            ),
            TokenKind::Punctuation => matches!(t.text.as_str(), "(" | "{" | "[" | "<|" | "*"),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.is("let") || self.is("letrec") {
            return self.let_expr();
        }
        let first = self.assign()?;
        if self.is(";") {
            self.pos += 1;
            if !self.starts_expr() {
                // trailing `;` as in `return e;`
                return Ok(first);
            }
            let rest = self.expr()?;
            let span = first.span.to(rest.span);
            return Ok(Expr::new(ExprKind::Sequence(Box::new(first), Box::new(rest)), span));
        }
        Ok(first)
    }

    fn let_expr(&mut self) -> PResult<Expr> {
        let start = self.peek_span();
        if self.eat("letrec") {
            let mut bindings = Vec::new();
            loop {
                let (name, _) = self.ident()?;
                self.expect(":")?;
                let ty = self.ty()?;
                self.expect("=")?;
                let value = self.expr()?;
                bindings.push(LetrecBinding { name, ty, value });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("in")?;
            let body = self.expr()?;
            let span = start.to(body.span);
            return Ok(Expr::new(ExprKind::LetRec(bindings, Box::new(body)), span));
        }
        self.expect("let")?;
        let mut bindings = Vec::new();
        loop {
            let pat = self.pattern()?;
            self.expect("=")?;
            let value = self.expr()?;
            bindings.push((pat, value));
            if !self.eat(",") {
                break;
            }
        }
        self.expect("in")?;
        let body = self.expr()?;
        let span = start.to(body.span);
        Ok(Expr::new(ExprKind::Let(bindings, Box::new(body)), span))
    }

    fn assign(&mut self) -> PResult<Expr> {
        if self.is("if") {
            let start = self.peek_span();
            self.pos += 1;
            let cond = self.expr()?;
            self.expect("then")?;
            let then = self.expr()?;
            self.expect("else")?;
            let els = self.assign()?;
            let span = start.to(els.span);
            return Ok(Expr::new(ExprKind::If(Box::new(cond), Box::new(then), Box::new(els)), span));
        }
        if self.is("let") || self.is("letrec") {
            return self.let_expr();
        }
        let lhs = self.cast()?;
        if self.eat(":=") {
            let rhs = self.assign()?;
            let span = lhs.span.to(rhs.span);
            return Ok(Expr::new(ExprKind::Assign(Box::new(lhs), Box::new(rhs)), span));
        }
        Ok(lhs)
    }

    fn cast(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat("as") {
                let t = self.ty()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::Ascription(Box::new(e), t), span);
            } else if self.is("cast") && self.is_at(1, "as") {
                self.pos += 2;
                let t = self.ty()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::CastAs(Box::new(e), t), span);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek_span();
        if self.eat("*") {
            let e = self.unary()?;
            let span = start.to(e.span);
            return Ok(Expr::new(ExprKind::Deref(Box::new(e)), span));
        }
        for (kw, fold) in [("fold", true), ("unfold", false)] {
            if self.eat(kw) {
                self.expect("[")?;
                let t = self.ty()?;
                self.expect("]")?;
                let e = self.unary()?;
                let span = start.to(e.span);
                let kind = if fold {
                    ExprKind::Fold(t, Box::new(e))
                } else {
                    ExprKind::Unfold(t, Box::new(e))
                };
                return Ok(Expr::new(kind, span));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat("(") {
                let args = self.comma_separated(")", Self::expr)?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::Application(Box::new(e), args), span);
            } else if self.eat("[") {
                let targs = self.comma_separated("]", Self::ty)?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::TypeApplication(Box::new(e), targs), span);
            } else if self.eat(".") {
                match self.peek() {
                    Some(t) if t.kind == TokenKind::Integer => {
                        let (index, span) = self.integer()?;
                        let index: usize = index
                            .try_into()
                            .map_err(|_| ParseError::new("tuple index too large", span))?;
                        let span = e.span.to(span);
                        e = Expr::new(ExprKind::TupleProj(Box::new(e), index), span);
                    }
                    Some(t) if t.kind == TokenKind::Identifier => {
                        let (label, span) = self.ident()?;
                        let span = e.span.to(span);
                        e = Expr::new(ExprKind::RecordProj(Box::new(e), label), span);
                    }
                    _ => return Err(self.error_expected(&["tuple index", "field label"])),
                }
            } else {
                return Ok(e);
            }
        }
    }

    fn paren_args<const N: usize>(&mut self) -> PResult<[Expr; N]> {
        self.expect("(")?;
        let mut out = Vec::with_capacity(N);
        for i in 0..N {
            if i > 0 {
                self.expect(",")?;
            }
            out.push(self.expr()?);
        }
        self.expect(")")?;
        Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
    }

    fn lambda_tail(&mut self) -> PResult<(Vec<Param>, Option<Type>, Expr)> {
        self.expect("fn")?;
        self.expect("(")?;
        let params = self.comma_separated(")", Self::param)?;
        let ret = if self.eat("->") { Some(self.ty()?) } else { None };
        self.expect("{")?;
        self.expect("return")?;
        let body = self.expr()?;
        self.expect("}")?;
        Ok((params, ret, body))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_expected(&["expression"]));
        };
        let start = tok.span;
        let done = |p: &Self, kind: ExprKind| Ok(Expr::new(kind, start.to(p.prev_span())));
        match tok.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                return done(self, ExprKind::Var(tok.text));
            }
            TokenKind::Integer => {
                let (value, _) = self.integer()?;
                let kind = if value.is_zero() { ExprKind::Zero } else { ExprKind::NatLiteral(value) };
                return done(self, kind);
            }
            TokenKind::ExtensionName => return Err(self.error_expected(&["expression"])),
            TokenKind::Keyword | TokenKind::Punctuation => {}
        }
        let unary: Option<fn(Box<Expr>) -> ExprKind> = match tok.text.as_str() {
            "succ" => Some(ExprKind::Succ),
            "Nat::pred" => Some(ExprKind::NatPred),
            "Nat::iszero" => Some(ExprKind::NatIsZero),
            "List::head" => Some(ExprKind::ListHead),
            "List::tail" => Some(ExprKind::ListTail),
            "List::isempty" => Some(ExprKind::ListIsEmpty),
            "inl" => Some(ExprKind::Inl),
            "inr" => Some(ExprKind::Inr),
            "new" => Some(ExprKind::NewRef),
            "fix" => Some(ExprKind::Fix),
            "throw" => Some(ExprKind::Throw),
            _ => None,
        };
        if let Some(ctor) = unary {
            self.pos += 1;
            let [e] = self.paren_args::<1>()?;
            return done(self, ctor(Box::new(e)));
        }
        match tok.text.as_str() {
            "true" => {
                self.pos += 1;
                done(self, ExprKind::True)
            }
            "false" => {
                self.pos += 1;
                done(self, ExprKind::False)
            }
            "unit" => {
                self.pos += 1;
                done(self, ExprKind::Unit)
            }
            "panic!" => {
                self.pos += 1;
                done(self, ExprKind::Panic)
            }
            "Nat::rec" => {
                self.pos += 1;
                let [n, z, s] = self.paren_args::<3>()?;
                done(self, ExprKind::NatRec(Box::new(n), Box::new(z), Box::new(s)))
            }
            "cons" => {
                self.pos += 1;
                let [h, t] = self.paren_args::<2>()?;
                done(self, ExprKind::ConsList(Box::new(h), Box::new(t)))
            }
            "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            "{" => {
                self.pos += 1;
                let is_record = self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) && self.is_at(1, "=");
                if is_record {
                    let fields = self.comma_separated("}", |p| {
                        let (label, _) = p.ident()?;
                        p.expect("=")?;
                        Ok((label, p.expr()?))
                    })?;
                    done(self, ExprKind::Record(fields))
                } else {
                    let items = self.comma_separated("}", Self::expr)?;
                    done(self, ExprKind::Tuple(items))
                }
            }
            "<|" => {
                self.pos += 1;
                let (label, _) = self.ident()?;
                self.expect("=")?;
                let e = self.expr()?;
                self.expect("|>")?;
                done(self, ExprKind::VariantInj(label, Box::new(e)))
            }
            "[" => {
                self.pos += 1;
                let items = self.comma_separated("]", Self::expr)?;
                done(self, ExprKind::ListLiteral(items))
            }
            "if" | "let" | "letrec" => {
                let e = self.assign()?;
                Ok(e)
            }
            "match" => {
                self.pos += 1;
                let scrutinee = self.expr()?;
                self.expect("{")?;
                let mut cases = Vec::new();
                if !self.eat("}") {
                    self.eat("|");
                    loop {
                        let pattern = self.pattern()?;
                        self.expect("=>")?;
                        let body = self.expr()?;
                        cases.push(MatchCase { pattern, body });
                        if self.eat("}") {
                            break;
                        }
                        if !self.eat("|") {
                            return Err(self.error_expected(&["`|`", "`}`"]));
                        }
                    }
                }
                done(self, ExprKind::Match(Box::new(scrutinee), cases))
            }
            "fn" => {
                let (params, ret, body) = self.lambda_tail()?;
                done(self, ExprKind::Abstraction { params, ret, body: Box::new(body) })
            }
            "generic" => {
                self.pos += 1;
                self.expect("[")?;
                let binders = self.comma_separated("]", |p| p.ident().map(|(n, _)| n))?;
                if binders.is_empty() {
                    return Err(ParseError::new("generic function needs at least one type parameter", self.prev_span()));
                }
                let (params, ret, body) = self.lambda_tail()?;
                done(self, ExprKind::GenericAbstraction { binders, params, ret, body: Box::new(body) })
            }
            "try" => {
                self.pos += 1;
                self.expect("{")?;
                let body = self.expr()?;
                self.expect("}")?;
                if self.eat("with") {
                    self.expect("{")?;
                    let fallback = self.expr()?;
                    self.expect("}")?;
                    done(self, ExprKind::TryWith(Box::new(body), Box::new(fallback)))
                } else if self.eat("catch") {
                    self.expect("{")?;
                    let pat = self.pattern()?;
                    self.expect("=>")?;
                    let handler = self.expr()?;
                    self.expect("}")?;
                    done(self, ExprKind::TryCatch(Box::new(body), pat, Box::new(handler)))
                } else {
                    Err(self.error_expected(&["`with`", "`catch`"]))
                }
            }
            _ => Err(self.error_expected(&["expression"])),
        }
    }

    // ----- patterns ---------------------------------------------------------

    fn pattern(&mut self) -> PResult<Pattern> {
        let mut p = self.pattern_atom()?;
        while self.eat("as") {
            let t = self.ty()?;
            let span = p.span.to(self.prev_span());
            p = Pattern::new(PatternKind::Ascription(Box::new(p), t), span);
        }
        Ok(p)
    }

    fn pattern_atom(&mut self) -> PResult<Pattern> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_expected(&["pattern"]));
        };
        let start = tok.span;
        let done = |p: &Self, kind: PatternKind| Ok(Pattern::new(kind, start.to(p.prev_span())));
        match tok.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                let kind = if tok.text == "_" { PatternKind::Wildcard } else { PatternKind::Var(tok.text) };
                return done(self, kind);
            }
            TokenKind::Integer => {
                let (value, _) = self.integer()?;
                let kind = if value.is_zero() { PatternKind::Zero } else { PatternKind::Int(value) };
                return done(self, kind);
            }
            TokenKind::ExtensionName => return Err(self.error_expected(&["pattern"])),
            TokenKind::Keyword | TokenKind::Punctuation => {}
        }
        let unary: Option<fn(Box<Pattern>) -> PatternKind> = match tok.text.as_str() {
            "succ" => Some(PatternKind::Succ),
            "inl" => Some(PatternKind::Inl),
            "inr" => Some(PatternKind::Inr),
            _ => None,
        };
        if let Some(ctor) = unary {
            self.pos += 1;
            self.expect("(")?;
            let inner = self.pattern()?;
            self.expect(")")?;
            return done(self, ctor(Box::new(inner)));
        }
        self.pos += 1;
        match tok.text.as_str() {
            "true" => done(self, PatternKind::True),
            "false" => done(self, PatternKind::False),
            "unit" => done(self, PatternKind::Unit),
            "cons" => {
                self.expect("(")?;
                let head = self.pattern()?;
                self.expect(",")?;
                let tail = self.pattern()?;
                self.expect(")")?;
                done(self, PatternKind::Cons(Box::new(head), Box::new(tail)))
            }
            "(" => {
                let p = self.pattern()?;
                self.expect(")")?;
                Ok(p)
            }
            "<|" => {
                let (label, _) = self.ident()?;
                self.expect("=")?;
                let inner = self.pattern()?;
                self.expect("|>")?;
                done(self, PatternKind::Variant(label, Box::new(inner)))
            }
            "[" => {
                let items = self.comma_separated("]", Self::pattern)?;
                done(self, PatternKind::List(items))
            }
            "{" => {
                let is_record = self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) && self.is_at(1, "=");
                if is_record {
                    let fields = self.comma_separated("}", |p| {
                        let (label, _) = p.ident()?;
                        p.expect("=")?;
                        Ok((label, p.pattern()?))
                    })?;
                    done(self, PatternKind::Record(fields))
                } else {
                    let items = self.comma_separated("}", Self::pattern)?;
                    done(self, PatternKind::Tuple(items))
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.error_expected(&["pattern"]))
            }
        }
    }
}

fn end_pos(source: &str) -> Pos {
    let mut pos = Pos::START;
    for c in source.chars() {
        pos.offset += c.len_utf8();
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str) -> Expr {
        Expr::synthetic(ExprKind::Var(name.into()))
    }

    fn ex(kind: ExprKind) -> Expr {
        Expr::synthetic(kind)
    }

    #[test]
    fn nested_succ() {
        let e = parse_expr("succ(succ(n))").unwrap();
        assert_eq!(e, ex(ExprKind::Succ(Box::new(ex(ExprKind::Succ(Box::new(var("n"))))))));
    }

    #[test]
    fn variant_injection_and_cast() {
        assert_eq!(
            parse_expr("<| value = n |>").unwrap(),
            ex(ExprKind::VariantInj("value".into(), Box::new(var("n"))))
        );
        assert_eq!(parse_expr("x cast as Top").unwrap(), ex(ExprKind::CastAs(Box::new(var("x")), Type::Top)));
    }

    #[test]
    fn missing_language_line() {
        let err = parse_program("fn main(n : Nat) -> Nat { return n }").unwrap_err();
        assert_eq!(err.expected, vec!["`language`"]);
        assert_eq!(err.span.start.offset, 0);
    }

    #[test]
    fn sequencing_is_right_associative_and_lowest() {
        let e = parse_expr("r := 0; *r; unit").unwrap();
        let ExprKind::Sequence(first, rest) = e.kind else { panic!("not a sequence") };
        assert!(matches!(first.kind, ExprKind::Assign(..)));
        assert!(matches!(rest.kind, ExprKind::Sequence(..)));
    }

    #[test]
    fn ascription_binds_looser_than_application() {
        let e = parse_expr("f(x) as Nat").unwrap();
        let ExprKind::Ascription(inner, Type::Nat) = e.kind else { panic!() };
        assert!(matches!(inner.kind, ExprKind::Application(..)));
    }

    #[test]
    fn postfix_chain() {
        let e = parse_expr("const[Nat](x)[Bool](false)").unwrap();
        let ExprKind::Application(f, args) = e.kind else { panic!() };
        assert_eq!(args, vec![ex(ExprKind::False)]);
        assert!(matches!(f.kind, ExprKind::TypeApplication(_, ref ts) if ts == &vec![Type::Bool]));
    }

    #[test]
    fn types() {
        assert_eq!(
            parse_type("forall Y. fn(Y) -> X").unwrap(),
            Type::forall(&["Y"], Type::func(vec![Type::var("Y")], Type::var("X")))
        );
        assert_eq!(
            parse_type("<| value : Nat, failure : Unit |>").unwrap(),
            Type::variant(&[("value", Type::Nat), ("failure", Type::Unit)])
        );
        assert_eq!(parse_type("{Nat, Bool}").unwrap(), Type::Tuple(vec![Type::Nat, Type::Bool]));
        assert_eq!(parse_type("{x : Nat}").unwrap(), Type::record(&[("x", Type::Nat)]));
        assert_eq!(parse_type("&[Nat]").unwrap(), Type::reference(Type::list(Type::Nat)));
        assert_eq!(
            parse_type("µ L. Unit + {Nat, L}").unwrap(),
            Type::mu("L", Type::sum(Type::Unit, Type::Tuple(vec![Type::Nat, Type::var("L")])))
        );
        assert_eq!(
            parse_type("fn(auto) -> auto").unwrap(),
            Type::func(vec![Type::Meta(0)], Type::Meta(1))
        );
    }

    #[test]
    fn patterns() {
        let p = parse_pattern("<| failure = _ |>").unwrap();
        assert_eq!(
            p,
            Pattern::synthetic(PatternKind::Variant("failure".into(), Box::new(Pattern::synthetic(PatternKind::Wildcard))))
        );
        let p = parse_pattern("cons(h, [])").unwrap();
        assert!(matches!(p.kind, PatternKind::Cons(..)));
        let p = parse_pattern("{a, b} as {Nat, Nat}").unwrap();
        assert!(matches!(p.kind, PatternKind::Ascription(..)));
    }

    #[test]
    fn parse_error_spans_stay_in_input() {
        for src in ["language core; fn", "language core; fn main(", "", "language", "language core; fn f(x : ) -> Nat {}"] {
            let err = parse_program(src).unwrap_err();
            assert!(err.span.end.offset <= src.len(), "{src:?}: {err:?}");
        }
    }

    #[test]
    fn duplicate_extensions_are_dropped() {
        let p = parse_program("language core; extend with #pairs, #pairs; extend with #records, #pairs;").unwrap();
        let names: Vec<_> = p.extensions.iter().map(|e| e.as_str()).collect();
        assert_eq!(names, vec!["#pairs", "#records"]);
    }

    #[test]
    fn return_with_trailing_semicolon() {
        let p = parse_program("language core;\nfn main(n : Nat) -> Nat {\n  return n;\n}\n").unwrap();
        assert_eq!(p.main().unwrap().body, var("n"));
    }
}
