//! Pattern typing, `match`/`let` rules and exhaustiveness of simple patterns.

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::reconstruct::PendingMatch;
use crate::span::Span;
use crate::syntax::{Expr, Extension, LetrecBinding, MatchCase, Pattern, PatternKind, Type};
use crate::typer::{TResult, Typer};

/// Variables bound by a pattern with their types, in pattern order.
pub type BindingSet = Vec<(String, Type)>;

/// Whether `patterns` cover every value of `t`. Every pattern must be simple
/// (constructor heads over variables and wildcards only).
pub fn is_exhaustive(t: &Type, patterns: &[&Pattern]) -> bool {
    let heads: Vec<&Pattern> = patterns.iter().map(|p| strip_ascriptions(p)).collect();
    if heads.iter().any(|p| p.is_binder()) {
        return true;
    }
    let has = |pred: fn(&PatternKind) -> bool| heads.iter().any(|p| pred(&p.kind));
    match t {
        Type::Bool => has(|k| matches!(k, PatternKind::True)) && has(|k| matches!(k, PatternKind::False)),
        Type::Nat => has(|k| matches!(k, PatternKind::Zero)) && has(|k| matches!(k, PatternKind::Succ(_))),
        Type::Unit => has(|k| matches!(k, PatternKind::Unit)),
        Type::Sum(..) => has(|k| matches!(k, PatternKind::Inl(_))) && has(|k| matches!(k, PatternKind::Inr(_))),
        Type::Variant(fields) => fields.iter().all(|(label, _)| {
            heads.iter().any(|p| matches!(&p.kind, PatternKind::Variant(l, _) if l == label))
        }),
        Type::List(_) => {
            has(|k| matches!(k, PatternKind::List(ps) if ps.is_empty())) && has(|k| matches!(k, PatternKind::Cons(..)))
        }
        Type::Tuple(_) => has(|k| matches!(k, PatternKind::Tuple(_))),
        Type::Record(_) => has(|k| matches!(k, PatternKind::Record(_))),
        Type::Bot => true,
        _ => false,
    }
}

fn strip_ascriptions(p: &Pattern) -> &Pattern {
    match &p.kind {
        PatternKind::Ascription(inner, _) => strip_ascriptions(inner),
        _ => p,
    }
}

/// Simple after peeling ascriptions at every level.
fn is_simple_pattern(p: &Pattern) -> bool {
    strip_ascriptions(p).children().into_iter().all(|c| strip_ascriptions(c).is_binder())
}

impl Typer<'_> {
    /// Extension gates for the pattern forms used in `p`.
    pub(crate) fn gate_pattern(&self, p: &Pattern) -> TResult<()> {
        if !is_simple_pattern(p) {
            self.require(&[Extension::StructuralPatterns], p.span, "a nested pattern")?;
        }
        self.gate_pattern_forms(p)
    }

    fn gate_pattern_forms(&self, p: &Pattern) -> TResult<()> {
        use Extension::*;
        let span = p.span;
        match &p.kind {
            PatternKind::Unit => self.require(&[UnitType], span, "a `unit` pattern")?,
            PatternKind::Int(_) => self.require(&[NaturalLiterals], span, "a natural number literal pattern")?,
            PatternKind::Inl(_) | PatternKind::Inr(_) => self.require(&[SumTypes], span, "a sum pattern")?,
            PatternKind::Variant(..) => self.require(&[Variants], span, "a variant pattern")?,
            PatternKind::Tuple(ps) if ps.len() == 2 => self.require(&[Pairs, Tuples], span, "a pair pattern")?,
            PatternKind::Tuple(_) => self.require(&[Tuples], span, "a tuple pattern")?,
            PatternKind::Record(_) => self.require(&[Records], span, "a record pattern")?,
            PatternKind::List(_) | PatternKind::Cons(..) => self.require(&[Lists], span, "a list pattern")?,
            PatternKind::Ascription(..) => self.require(&[TypeAscriptions], span, "a pattern ascription")?,
            _ => {}
        }
        p.children().into_iter().try_for_each(|c| self.gate_pattern_forms(c))
    }

    /// Types of the variables bound when `p` matches a value of type `t`.
    pub fn pattern_bindings(&mut self, p: &Pattern, t: &Type) -> TResult<BindingSet> {
        let mut out = BindingSet::new();
        self.collect_bindings(p, t, &mut out)?;
        Ok(out)
    }

    fn collect_bindings(&mut self, p: &Pattern, t: &Type, out: &mut BindingSet) -> TResult<()> {
        let span = p.span;
        let t = self.resolve_meta_for(p, t);
        let mismatch = |tc: &Self| {
            Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_PATTERN_FOR_TYPE,
                span,
                format!("pattern cannot match values of type `{}`", tc.show(&t)),
            )
        };
        match (&p.kind, &t) {
            (PatternKind::Var(name), _) => {
                if out.iter().any(|(n, _)| n == name) {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_DUPLICATE_PATTERN_VARIABLE,
                        span,
                        format!("variable `{name}` is bound more than once in this pattern"),
                    ));
                }
                out.push((name.clone(), t.clone()));
            }
            (PatternKind::Wildcard, _) => {}
            (PatternKind::True | PatternKind::False, Type::Bool) => {}
            (PatternKind::Zero | PatternKind::Int(_), Type::Nat) => {}
            (PatternKind::Succ(inner), Type::Nat) => self.collect_bindings(inner, &Type::Nat, out)?,
            (PatternKind::Unit, Type::Unit) => {}
            (PatternKind::Inl(inner), Type::Sum(l, _)) => self.collect_bindings(inner, l, out)?,
            (PatternKind::Inr(inner), Type::Sum(_, r)) => self.collect_bindings(inner, r, out)?,
            (PatternKind::Variant(label, inner), Type::Variant(fields)) => {
                let Some((_, payload)) = fields.iter().find(|(l, _)| l == label) else {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_UNEXPECTED_PATTERN_FOR_TYPE,
                        span,
                        format!("label `{label}` does not occur in variant type `{}`", self.show(&t)),
                    ));
                };
                self.collect_bindings(inner, payload, out)?;
            }
            (PatternKind::Tuple(ps), Type::Tuple(ts)) if ps.len() == ts.len() => {
                for (p, t) in ps.iter().zip(ts) {
                    self.collect_bindings(p, t, out)?;
                }
            }
            (PatternKind::Record(fs), Type::Record(ts)) => {
                crate::typer::check_distinct_labels(fs, ErrorTag::ERROR_DUPLICATE_RECORD_FIELDS, span)?;
                for (label, p) in fs {
                    let Some((_, ft)) = ts.iter().find(|(l, _)| l == label) else {
                        return Err(Diagnostic::new(
                            ErrorTag::ERROR_UNEXPECTED_PATTERN_FOR_TYPE,
                            span,
                            format!("record type `{}` has no field `{label}`", self.show(&t)),
                        ));
                    };
                    self.collect_bindings(p, ft, out)?;
                }
            }
            (PatternKind::List(ps), Type::List(elem)) => {
                for p in ps {
                    self.collect_bindings(p, elem, out)?;
                }
            }
            (PatternKind::Cons(h, tl), Type::List(elem)) => {
                self.collect_bindings(h, elem, out)?;
                self.collect_bindings(tl, &t, out)?;
            }
            (PatternKind::Ascription(inner, ann), _) => {
                let ann = self.elaborate(ann, span)?;
                if !self.relate(&t, &ann, span) {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_UNEXPECTED_PATTERN_FOR_TYPE,
                        span,
                        format!("pattern is ascribed `{}` but matches values of type `{}`", self.show(&ann), self.show(&t)),
                    ));
                }
                self.collect_bindings(inner, &ann, out)?;
            }
            _ => return Err(mismatch(self)),
        }
        Ok(())
    }

    /// During reconstruction, a metavariable scrutinee is constrained to the
    /// shape the pattern demands.
    fn resolve_meta_for(&mut self, p: &Pattern, t: &Type) -> Type {
        if !matches!(t, Type::Meta(_)) {
            return t.clone();
        }
        let span = p.span;
        let shaped = match &p.kind {
            PatternKind::True | PatternKind::False => self.meta_shape(t, span, |_| Type::Bool),
            PatternKind::Zero | PatternKind::Int(_) | PatternKind::Succ(_) => self.meta_shape(t, span, |_| Type::Nat),
            PatternKind::Unit => self.meta_shape(t, span, |_| Type::Unit),
            PatternKind::Inl(_) | PatternKind::Inr(_) => self.meta_shape(t, span, |r| Type::sum(r.fresh(), r.fresh())),
            PatternKind::Tuple(ps) => {
                let n = ps.len();
                self.meta_shape(t, span, |r| Type::Tuple((0..n).map(|_| r.fresh()).collect()))
            }
            PatternKind::List(_) | PatternKind::Cons(..) => self.meta_shape(t, span, |r| Type::list(r.fresh())),
            _ => None,
        };
        shaped.unwrap_or_else(|| t.clone())
    }

    /// Reports non-exhaustive patterns; deferred until metavariables are
    /// solved during reconstruction.
    fn require_exhaustive(&mut self, patterns: &[&Pattern], t: &Type, span: Span) -> TResult<()> {
        if !patterns.iter().all(|p| is_simple_pattern(p)) {
            // nested patterns are not checked for coverage
            return Ok(());
        }
        if t.contains_meta() {
            if let Some(recon) = self.recon.as_mut() {
                recon.pending.push(PendingMatch {
                    patterns: patterns.iter().map(|p| (*p).clone()).collect(),
                    ty: t.clone(),
                    span,
                });
                return Ok(());
            }
        }
        if is_exhaustive(t, patterns) {
            Ok(())
        } else {
            Err(nonexhaustive(t, span))
        }
    }

    /// `match e { p => e | ... }`; returns the type of the branches.
    pub fn check_match(
        &mut self,
        scrutinee: &Expr,
        cases: &[MatchCase],
        expected: Option<&Type>,
        span: Span,
    ) -> TResult<Type> {
        if cases.is_empty() {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_ILLEGAL_EMPTY_MATCHING,
                span,
                "a match expression needs at least one case",
            ));
        }
        let t = self.infer(scrutinee)?;
        let mut result = expected.cloned();
        for case in cases {
            self.gate_pattern(&case.pattern)?;
            let bindings = self.pattern_bindings(&case.pattern, &t)?;
            let branch = self.scoped(|tc| {
                for (name, ty) in bindings {
                    tc.ctx.bind(name, ty);
                }
                match &result {
                    Some(r) => tc.check(&case.body, r).map(|_| r.clone()),
                    None => tc.infer(&case.body),
                }
            })?;
            result.get_or_insert(branch);
        }
        let patterns: Vec<&Pattern> = cases.iter().map(|c| &c.pattern).collect();
        self.require_exhaustive(&patterns, &t, span)?;
        Ok(result.expect("at least one case"))
    }

    /// Binds `let p = e, ...` sequentially into the current scope.
    pub(crate) fn bind_let(&mut self, bindings: &[(Pattern, Expr)]) -> TResult<()> {
        for (pattern, value) in bindings {
            self.gate_pattern(pattern)?;
            let t = match &pattern.kind {
                PatternKind::Ascription(_, ann) => {
                    let ann = self.elaborate(ann, pattern.span)?;
                    self.check(value, &ann)?;
                    ann
                }
                _ => self.infer(value)?,
            };
            let bound = self.pattern_bindings(pattern, &t)?;
            self.require_exhaustive(&[pattern], &t, pattern.span)?;
            for (name, ty) in bound {
                self.ctx.bind(name, ty);
            }
        }
        Ok(())
    }

    /// Binds `letrec x : T = e, ...` into the current scope; every binding is
    /// visible in every right-hand side.
    pub(crate) fn bind_letrec(&mut self, bindings: &[LetrecBinding], span: Span) -> TResult<()> {
        let mut typed = Vec::with_capacity(bindings.len());
        for (i, b) in bindings.iter().enumerate() {
            if bindings[..i].iter().any(|o| o.name == b.name) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_DUPLICATE_PATTERN_VARIABLE,
                    span,
                    format!("`{}` is bound more than once in this letrec", b.name),
                ));
            }
            typed.push(self.elaborate(&b.ty, span)?);
        }
        for (b, t) in bindings.iter().zip(&typed) {
            self.ctx.bind(b.name.clone(), t.clone());
        }
        for (b, t) in bindings.iter().zip(&typed) {
            self.check(&b.value, t)?;
        }
        Ok(())
    }
}

pub(crate) fn nonexhaustive(t: &Type, span: Span) -> Diagnostic {
    Diagnostic::new(
        ErrorTag::ERROR_NONEXHAUSTIVE_MATCH_PATTERNS,
        span,
        format!("patterns do not cover every value of type `{}`", crate::syntax::print_type(t)),
    )
}
