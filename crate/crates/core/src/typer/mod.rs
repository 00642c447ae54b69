//! Bidirectional typechecker.
//!
//! [`Typer::infer`] synthesizes a type; [`Typer::check`] verifies an
//! expression against an expected type, pushing that type into
//! introduction forms. Injections, empty lists, `panic!` and `throw` have
//! checking rules only. The rules for references, exceptions, patterns,
//! quantifiers, casts and reconstruction live in their own modules and are
//! attached to [`Typer`] there.

mod context;
mod program;

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::poly::alpha_eq;
use crate::reconstruct::{Constraint, Recon};
use crate::span::Span;
use crate::subtype::subtype;
use crate::syntax::{print_expr, print_type, resolve_alias, AliasMap, Expr, ExprKind, Extension, Param, Type};

pub use self::context::{Context, Mark};
pub use self::program::{check_main_input, typecheck_program, Checked, Options};

pub type TResult<T> = Result<T, Diagnostic>;

/// Structural type equality after alias expansion, up to alpha-renaming of
/// binders. Record and variant field order is significant.
pub fn type_eq(a: &Type, b: &Type, aliases: &AliasMap) -> bool {
    match (resolve_alias(a, aliases), resolve_alias(b, aliases)) {
        (Ok(a), Ok(b)) => alpha_eq(&a, &b),
        _ => false,
    }
}

/// Synthesizes the type of `e` under `ctx`.
pub fn infer(ctx: &mut Context, e: &Expr) -> TResult<Type> {
    Typer::new(ctx).infer(e)
}

/// Checks `e` against `expected` under `ctx`.
pub fn check(ctx: &mut Context, e: &Expr, expected: &Type) -> TResult<()> {
    Typer::new(ctx).check(e, expected)
}

/// One typechecking run over a context.
pub struct Typer<'c> {
    pub(crate) ctx: &'c mut Context,
    pub(crate) recon: Option<Recon>,
    trace: Option<Vec<String>>,
    depth: usize,
}

impl<'c> Typer<'c> {
    pub fn new(ctx: &'c mut Context) -> Typer<'c> {
        Typer { ctx, recon: None, trace: None, depth: 0 }
    }

    /// Typer that emits equality constraints for metavariables instead of
    /// comparing types. Fresh metavariables start at `first_meta`.
    pub fn reconstructing(ctx: &'c mut Context, first_meta: u32) -> Typer<'c> {
        Typer { ctx, recon: Some(Recon::new(first_meta)), trace: None, depth: 0 }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.take().unwrap_or_default()
    }

    pub fn take_recon(&mut self) -> Option<Recon> {
        self.recon.take()
    }

    pub fn context(&mut self) -> &mut Context {
        self.ctx
    }

    pub(crate) fn show(&self, t: &Type) -> String {
        print_type(t)
    }

    // ----- scoping ----------------------------------------------------------

    pub(crate) fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        let mark = self.ctx.mark();
        let out = f(self);
        self.ctx.restore(mark);
        out
    }

    pub(crate) fn scoped_type_vars<T>(
        &mut self,
        binders: &[String],
        f: impl FnOnce(&mut Self) -> TResult<T>,
    ) -> TResult<T> {
        self.scoped(|t| {
            for b in binders {
                t.ctx.bind_type_var(b.clone());
            }
            f(t)
        })
    }

    // ----- extension gates ---------------------------------------------------

    /// Succeeds when any of `exts` is enabled (or gating is off).
    pub(crate) fn require(&self, exts: &[Extension], span: Span, what: &str) -> TResult<()> {
        if self.ctx.permissive || exts.iter().any(|e| self.ctx.enabled(*e)) {
            return Ok(());
        }
        let names: Vec<&str> = exts.iter().map(|e| e.name()).collect();
        Err(Diagnostic::new(
            ErrorTag::ERROR_EXTENSION_NOT_ENABLED,
            span,
            format!("{what} requires extension {}", names.join(" or ")),
        ))
    }

    fn gate_expr(&self, e: &Expr) -> TResult<()> {
        use Extension::*;
        let span = e.span;
        match &e.kind {
            ExprKind::Unit => self.require(&[UnitType], span, "`unit`"),
            ExprKind::NatLiteral(_) => self.require(&[NaturalLiterals], span, "a natural number literal"),
            ExprKind::Abstraction { params, .. } if params.len() != 1 => {
                self.require(&[MultiparameterFunctions], span, "a function with other than one parameter")
            }
            ExprKind::GenericAbstraction { params, .. } => {
                self.require(&[UniversalTypes], span, "a generic function")?;
                if params.len() != 1 {
                    self.require(&[MultiparameterFunctions], span, "a function with other than one parameter")?;
                }
                Ok(())
            }
            ExprKind::TypeApplication(..) => self.require(&[UniversalTypes], span, "type application"),
            ExprKind::Tuple(es) if es.len() == 2 => self.require(&[Pairs, Tuples], span, "a pair"),
            ExprKind::Tuple(_) => self.require(&[Tuples], span, "a tuple"),
            ExprKind::TupleProj(_, i) if *i <= 2 => self.require(&[Pairs, Tuples], span, "a projection"),
            ExprKind::TupleProj(..) => self.require(&[Tuples], span, "a tuple projection"),
            ExprKind::Record(_) | ExprKind::RecordProj(..) => self.require(&[Records], span, "a record"),
            ExprKind::Inl(_) | ExprKind::Inr(_) => self.require(&[SumTypes], span, "a sum injection"),
            ExprKind::VariantInj(..) => self.require(&[Variants], span, "a variant"),
            ExprKind::ListLiteral(_)
            | ExprKind::ConsList(..)
            | ExprKind::ListHead(_)
            | ExprKind::ListTail(_)
            | ExprKind::ListIsEmpty(_) => self.require(&[Lists], span, "a list operation"),
            ExprKind::Let(..) => self.require(&[LetBindings], span, "`let`"),
            ExprKind::LetRec(..) => self.require(&[LetrecBindings], span, "`letrec`"),
            ExprKind::Ascription(..) => self.require(&[TypeAscriptions], span, "a type ascription"),
            ExprKind::Sequence(..) => self.require(&[Sequencing], span, "sequencing"),
            ExprKind::NewRef(_) | ExprKind::Deref(_) | ExprKind::Assign(..) => {
                self.require(&[References], span, "a reference operation")
            }
            ExprKind::Panic => self.require(&[Panic], span, "`panic!`"),
            ExprKind::Throw(_) | ExprKind::TryWith(..) | ExprKind::TryCatch(..) => {
                self.require(&[Exceptions], span, "exception handling")
            }
            ExprKind::CastAs(..) => self.require(&[TypeCast], span, "`cast as`"),
            ExprKind::Fix(_) => self.require(&[GeneralRecursion], span, "`fix`"),
            ExprKind::Fold(..) | ExprKind::Unfold(..) => self.require(&[RecursiveTypes], span, "`fold`/`unfold`"),
            _ => Ok(()),
        }
    }

    // ----- annotations --------------------------------------------------------

    /// Turns a written type into the internal form: aliases expanded, type
    /// variables checked against the enclosing binders, and extension gates
    /// applied to each type former.
    pub fn elaborate(&self, t: &Type, span: Span) -> TResult<Type> {
        let mut bound = Vec::new();
        self.elaborate_in(t, span, &mut bound)
    }

    fn elaborate_in(&self, t: &Type, span: Span, bound: &mut Vec<String>) -> TResult<Type> {
        use Extension::*;
        let go = |t: &Type, bound: &mut Vec<String>| self.elaborate_in(t, span, bound);
        Ok(match t {
            Type::Bool | Type::Nat | Type::Unit => t.clone(),
            Type::Top => {
                self.require(&[TopType, StructuralSubtyping], span, "type `Top`")?;
                Type::Top
            }
            Type::Bot => {
                self.require(&[BottomType, StructuralSubtyping], span, "type `Bot`")?;
                Type::Bot
            }
            Type::Meta(id) => {
                if self.recon.is_none() {
                    self.require(&[TypeReconstruction], span, "`auto`")?;
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_EXTENSION_NOT_ENABLED,
                        span,
                        "`auto` requires extension #type-reconstruction",
                    ));
                }
                Type::Meta(*id)
            }
            Type::Var(name) | Type::Alias(name) => {
                if bound.contains(name) || self.ctx.has_type_var(name) {
                    Type::Var(name.clone())
                } else if let Some(expanded) = self.ctx.aliases.get(name) {
                    expanded.clone()
                } else {
                    let tag = if self.ctx.enabled(TypeAliases) && !self.ctx.enabled(UniversalTypes) {
                        ErrorTag::ERROR_UNDEFINED_TYPE_ALIAS
                    } else {
                        ErrorTag::ERROR_UNDEFINED_TYPE_VARIABLE
                    };
                    return Err(Diagnostic::new(tag, span, format!("undefined type `{name}`")));
                }
            }
            Type::Fn(ps, r) => {
                if ps.len() != 1 {
                    self.require(&[MultiparameterFunctions], span, "a function type with other than one parameter")?;
                }
                Type::Fn(ps.iter().map(|p| go(p, bound)).collect::<TResult<_>>()?, Box::new(go(r, bound)?))
            }
            Type::Tuple(ts) => {
                if ts.len() == 2 {
                    self.require(&[Pairs, Tuples], span, "a pair type")?;
                } else {
                    self.require(&[Tuples], span, "a tuple type")?;
                }
                Type::Tuple(ts.iter().map(|t| go(t, bound)).collect::<TResult<_>>()?)
            }
            Type::Record(fs) => {
                self.require(&[Records], span, "a record type")?;
                check_distinct_labels(fs, ErrorTag::ERROR_DUPLICATE_RECORD_FIELDS, span)?;
                Type::Record(fs.iter().map(|(l, t)| Ok((l.clone(), go(t, bound)?))).collect::<TResult<_>>()?)
            }
            Type::Variant(fs) => {
                self.require(&[Variants], span, "a variant type")?;
                check_distinct_labels(fs, ErrorTag::ERROR_DUPLICATE_VARIANT_LABELS, span)?;
                Type::Variant(fs.iter().map(|(l, t)| Ok((l.clone(), go(t, bound)?))).collect::<TResult<_>>()?)
            }
            Type::Sum(l, r) => {
                self.require(&[SumTypes], span, "a sum type")?;
                Type::sum(go(l, bound)?, go(r, bound)?)
            }
            Type::List(t) => {
                self.require(&[Lists], span, "a list type")?;
                Type::list(go(t, bound)?)
            }
            Type::Ref(t) => {
                self.require(&[References], span, "a reference type")?;
                Type::reference(go(t, bound)?)
            }
            Type::Forall(bs, body) => {
                self.require(&[UniversalTypes], span, "a universal type")?;
                let n = bound.len();
                bound.extend(bs.iter().cloned());
                let body = go(body, bound);
                bound.truncate(n);
                Type::Forall(bs.clone(), Box::new(body?))
            }
            Type::Mu(b, body) => {
                self.require(&[RecursiveTypes], span, "a recursive type")?;
                bound.push(b.clone());
                let body = go(body, bound);
                bound.pop();
                Type::Mu(b.clone(), Box::new(body?))
            }
        })
    }

    // ----- comparing types ----------------------------------------------------

    pub(crate) fn fresh_meta(&mut self) -> Option<Type> {
        self.recon.as_mut().map(Recon::fresh)
    }

    /// When `t` is a metavariable during reconstruction, constrains it to the
    /// shape built by `make` and returns that shape.
    pub(crate) fn meta_shape(&mut self, t: &Type, span: Span, make: impl FnOnce(&mut Recon) -> Type) -> Option<Type> {
        match (t, self.recon.as_mut()) {
            (Type::Meta(_), Some(recon)) => {
                let shape = make(recon);
                recon.constraints.push(Constraint::new(t.clone(), shape.clone(), span));
                Some(shape)
            }
            _ => None,
        }
    }

    /// Whether a value of type `actual` is acceptable where `expected` is
    /// required: subtyping when enabled, equality otherwise. Metavariables
    /// produce a constraint and count as related.
    pub(crate) fn relate(&mut self, actual: &Type, expected: &Type, span: Span) -> bool {
        if let Some(recon) = self.recon.as_mut() {
            if actual.contains_meta() || expected.contains_meta() {
                recon.constraints.push(Constraint::new(actual.clone(), expected.clone(), span));
                return true;
            }
        }
        if self.ctx.subtyping_enabled() {
            subtype(actual, expected)
        } else {
            alpha_eq(actual, expected)
        }
    }

    pub(crate) fn expect_type(&mut self, actual: &Type, expected: &Type, span: Span) -> TResult<()> {
        if self.relate(actual, expected, span) {
            Ok(())
        } else {
            Err(self.mismatch(actual, expected, span))
        }
    }

    pub(crate) fn mismatch(&self, actual: &Type, expected: &Type, span: Span) -> Diagnostic {
        let (a, x) = (self.show(actual), self.show(expected));
        if self.ctx.subtyping_enabled() {
            return Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_SUBTYPE,
                span,
                format!("expected a subtype of `{x}`, found `{a}`"),
            );
        }
        let message = format!("expected type `{x}`, found `{a}`");
        match (actual, expected) {
            (Type::Record(have), Type::Record(want)) => {
                if let Some((l, _)) = want.iter().find(|(l, _)| !have.iter().any(|(m, _)| m == l)) {
                    return Diagnostic::new(ErrorTag::ERROR_MISSING_RECORD_FIELDS, span, message)
                        .with_note(format!("missing field `{l}`"));
                }
                if let Some((l, _)) = have.iter().find(|(l, _)| !want.iter().any(|(m, _)| m == l)) {
                    return Diagnostic::new(ErrorTag::ERROR_UNEXPECTED_RECORD_FIELDS, span, message)
                        .with_note(format!("unexpected field `{l}`"));
                }
            }
            (Type::Tuple(have), Type::Tuple(want)) if have.len() != want.len() => {
                return Diagnostic::new(ErrorTag::ERROR_UNEXPECTED_TUPLE_LENGTH, span, message);
            }
            _ => {}
        }
        Diagnostic::new(ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION, span, message)
    }

    fn unexpected_form(&self, what: &str, expected: &Type, span: Span) -> Diagnostic {
        Diagnostic::new(
            ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
            span,
            format!("expected an expression of type `{}`, found {what}", self.show(expected)),
        )
    }

    fn record_trace(&mut self, e: &Expr, judgment: &str, t: &Type) {
        if self.trace.is_none() {
            return;
        }
        let mut text = print_expr(e);
        if text.chars().count() > 60 {
            text = text.chars().take(57).collect::<String>() + "...";
        }
        let line = format!("{}⊢ {text} {judgment} {}", "  ".repeat(self.depth), self.show(t));
        if let Some(trace) = self.trace.as_mut() {
            trace.push(line);
        }
    }

    // ----- synthesis --------------------------------------------------------------

    pub fn infer(&mut self, e: &Expr) -> TResult<Type> {
        self.gate_expr(e)?;
        self.depth += 1;
        let out = self.infer_inner(e);
        self.depth -= 1;
        if let Ok(t) = &out {
            self.record_trace(e, "⇒", t);
        }
        out
    }

    fn infer_inner(&mut self, e: &Expr) -> TResult<Type> {
        let span = e.span;
        match &e.kind {
            ExprKind::Var(name) => self.ctx.lookup(name).cloned().ok_or_else(|| {
                Diagnostic::new(ErrorTag::ERROR_UNDEFINED_VARIABLE, span, format!("undefined variable `{name}`"))
            }),
            ExprKind::True | ExprKind::False => Ok(Type::Bool),
            ExprKind::Unit => Ok(Type::Unit),
            ExprKind::Zero | ExprKind::NatLiteral(_) => Ok(Type::Nat),
            ExprKind::Succ(n) | ExprKind::NatPred(n) => {
                self.check(n, &Type::Nat)?;
                Ok(Type::Nat)
            }
            ExprKind::NatIsZero(n) => {
                self.check(n, &Type::Nat)?;
                Ok(Type::Bool)
            }
            ExprKind::NatRec(n, z, s) => {
                self.check(n, &Type::Nat)?;
                let t = self.infer(z)?;
                self.check(s, &nat_rec_step(&t))?;
                Ok(t)
            }
            ExprKind::If(c, t, f) => {
                self.check(c, &Type::Bool)?;
                let ty = self.infer(t)?;
                self.check(f, &ty)?;
                Ok(ty)
            }
            ExprKind::Abstraction { params, ret, body } => self.infer_lambda(params, ret.as_ref(), body, span),
            ExprKind::GenericAbstraction { binders, params, ret, body } => {
                self.check_generic(binders, params, ret.as_ref(), body, span)
            }
            ExprKind::Application(f, args) => self.infer_application(f, args, span),
            ExprKind::TypeApplication(f, targs) => self.check_type_application(f, targs, span),
            ExprKind::Tuple(es) => Ok(Type::Tuple(es.iter().map(|e| self.infer(e)).collect::<TResult<_>>()?)),
            ExprKind::TupleProj(t, index) => {
                let ty = self.infer(t)?;
                match ty {
                    Type::Tuple(ts) => {
                        if *index == 0 || *index > ts.len() {
                            return Err(Diagnostic::new(
                                ErrorTag::ERROR_TUPLE_INDEX_OUT_OF_BOUNDS,
                                span,
                                format!("index {index} is out of bounds for a tuple of length {}", ts.len()),
                            ));
                        }
                        Ok(ts[index - 1].clone())
                    }
                    other => Err(Diagnostic::new(
                        ErrorTag::ERROR_NOT_A_TUPLE,
                        t.span,
                        format!("expected a tuple, found an expression of type `{}`", self.show(&other)),
                    )),
                }
            }
            ExprKind::Record(fields) => {
                check_distinct_labels(fields, ErrorTag::ERROR_DUPLICATE_RECORD_FIELDS, span)?;
                let typed = fields
                    .iter()
                    .map(|(l, e)| Ok((l.clone(), self.infer(e)?)))
                    .collect::<TResult<Vec<_>>>()?;
                Ok(Type::Record(typed))
            }
            ExprKind::RecordProj(r, label) => {
                let ty = self.infer(r)?;
                match ty {
                    Type::Record(fs) => fs.iter().find(|(l, _)| l == label).map(|(_, t)| t.clone()).ok_or_else(|| {
                        Diagnostic::new(
                            ErrorTag::ERROR_UNEXPECTED_FIELD_ACCESS,
                            span,
                            format!("record of type `{}` has no field `{label}`", self.show(&Type::Record(fs.clone()))),
                        )
                    }),
                    other => Err(Diagnostic::new(
                        ErrorTag::ERROR_NOT_A_RECORD,
                        r.span,
                        format!("expected a record, found an expression of type `{}`", self.show(&other)),
                    )),
                }
            }
            ExprKind::Inl(_) | ExprKind::Inr(_) => match (self.fresh_meta(), self.fresh_meta()) {
                (Some(l), Some(r)) => {
                    let ty = Type::sum(l, r);
                    self.check(e, &ty)?;
                    Ok(ty)
                }
                _ => Err(Diagnostic::new(
                    ErrorTag::ERROR_AMBIGUOUS_SUM_TYPE,
                    span,
                    "cannot infer the type of a sum injection; add a type annotation",
                )),
            },
            ExprKind::VariantInj(label, payload) => {
                if self.ctx.subtyping_enabled() {
                    let t = self.infer(payload)?;
                    return Ok(Type::Variant(vec![(label.clone(), t)]));
                }
                Err(Diagnostic::new(
                    ErrorTag::ERROR_AMBIGUOUS_VARIANT_TYPE,
                    span,
                    "cannot infer the type of a variant; add a type annotation",
                ))
            }
            ExprKind::ListLiteral(items) => {
                let Some((first, rest)) = items.split_first() else {
                    return match self.fresh_meta() {
                        Some(m) => Ok(Type::list(m)),
                        None => Err(Diagnostic::new(
                            ErrorTag::ERROR_AMBIGUOUS_LIST_TYPE,
                            span,
                            "cannot infer the element type of an empty list; add a type annotation",
                        )),
                    };
                };
                let t = self.infer(first)?;
                for item in rest {
                    self.check(item, &t)?;
                }
                Ok(Type::list(t))
            }
            ExprKind::ConsList(head, tail) => {
                let t = self.infer(head)?;
                let list = Type::list(t);
                self.check(tail, &list)?;
                Ok(list)
            }
            ExprKind::ListHead(l) | ExprKind::ListTail(l) | ExprKind::ListIsEmpty(l) => {
                let ty = self.infer(l)?;
                let ty = self.meta_shape(&ty, l.span, |r| Type::list(r.fresh())).unwrap_or(ty);
                let Type::List(elem) = ty else {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_NOT_A_LIST,
                        l.span,
                        format!("expected a list, found an expression of type `{}`", self.show(&ty)),
                    ));
                };
                Ok(match &e.kind {
                    ExprKind::ListHead(_) => *elem,
                    ExprKind::ListTail(_) => Type::List(elem),
                    _ => Type::Bool,
                })
            }
            ExprKind::Match(scrutinee, cases) => self.check_match(scrutinee, cases, None, span),
            ExprKind::Let(bindings, body) => self.scoped(|t| {
                t.bind_let(bindings)?;
                t.infer(body)
            }),
            ExprKind::LetRec(bindings, body) => self.scoped(|t| {
                t.bind_letrec(bindings, span)?;
                t.infer(body)
            }),
            ExprKind::Ascription(inner, ty) => {
                let ty = self.elaborate(ty, span)?;
                self.check(inner, &ty)?;
                Ok(ty)
            }
            ExprKind::Sequence(first, second) => self.check_sequence(first, second, None),
            ExprKind::NewRef(_) | ExprKind::Deref(_) | ExprKind::Assign(..) => self.check_ref_ops(e, None),
            ExprKind::Panic | ExprKind::Throw(_) | ExprKind::TryWith(..) | ExprKind::TryCatch(..) => {
                self.check_exceptions(e, None)
            }
            ExprKind::CastAs(inner, target) => self.check_cast(inner, target, span),
            ExprKind::Fix(f) => {
                let ty = self.infer(f)?;
                let ty = self
                    .meta_shape(&ty, f.span, |r| {
                        let m = r.fresh();
                        Type::func(vec![m.clone()], m)
                    })
                    .unwrap_or(ty);
                match ty {
                    Type::Fn(ps, r) if ps.len() == 1 => {
                        self.expect_type(&r, &ps[0], f.span)?;
                        Ok(ps[0].clone())
                    }
                    other => Err(Diagnostic::new(
                        ErrorTag::ERROR_NOT_A_FUNCTION,
                        f.span,
                        format!("`fix` expects a single-parameter function, found `{}`", self.show(&other)),
                    )),
                }
            }
            ExprKind::Fold(t, inner) => self.check_fold_unfold(t, inner, false, span),
            ExprKind::Unfold(t, inner) => self.check_fold_unfold(t, inner, true, span),
        }
    }

    pub(crate) fn check_param_names(&self, params: &[Param]) -> TResult<()> {
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_DUPLICATE_PARAMETER,
                    p.span,
                    format!("parameter `{}` is declared twice", p.name),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn infer_lambda(&mut self, params: &[Param], ret: Option<&Type>, body: &Expr, span: Span) -> TResult<Type> {
        self.check_param_names(params)?;
        let param_types = params
            .iter()
            .map(|p| self.elaborate(&p.ty, p.span))
            .collect::<TResult<Vec<_>>>()?;
        let ret = ret.map(|r| self.elaborate(r, span)).transpose()?;
        let result = self.scoped(|t| {
            for (p, ty) in params.iter().zip(&param_types) {
                t.ctx.bind(p.name.clone(), ty.clone());
            }
            match ret {
                Some(r) => {
                    t.check(body, &r)?;
                    Ok(r)
                }
                None => t.infer(body),
            }
        })?;
        Ok(Type::Fn(param_types, Box::new(result)))
    }

    fn infer_application(&mut self, f: &Expr, args: &[Expr], span: Span) -> TResult<Type> {
        let f_ty = self.infer(f)?;
        let f_ty = self
            .meta_shape(&f_ty, f.span, |r| {
                let params = args.iter().map(|_| r.fresh()).collect();
                Type::Fn(params, Box::new(r.fresh()))
            })
            .unwrap_or(f_ty);
        let Type::Fn(params, ret) = f_ty else {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_NOT_A_FUNCTION,
                f.span,
                format!("expression of type `{}` is not a function", self.show(&f_ty)),
            ));
        };
        let partial = args.len() < params.len()
            && !args.is_empty()
            && (self.ctx.permissive || self.ctx.enabled(Extension::Currying));
        if args.len() != params.len() && !partial {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_INCORRECT_NUMBER_OF_ARGUMENTS,
                span,
                format!("expected {} argument(s), got {}", params.len(), args.len()),
            ));
        }
        for (arg, p) in args.iter().zip(&params) {
            self.check(arg, p)?;
        }
        if partial {
            Ok(Type::Fn(params[args.len()..].to_vec(), ret))
        } else {
            Ok(*ret)
        }
    }

    // ----- checking ------------------------------------------------------------

    pub fn check(&mut self, e: &Expr, expected: &Type) -> TResult<()> {
        self.gate_expr(e)?;
        self.depth += 1;
        let out = self.check_inner(e, expected);
        self.depth -= 1;
        if out.is_ok() {
            self.record_trace(e, "⇐", expected);
        }
        out
    }

    fn check_by_inference(&mut self, e: &Expr, expected: &Type) -> TResult<()> {
        let actual = self.infer_inner(e)?;
        self.expect_type(&actual, expected, e.span)
    }

    fn check_inner(&mut self, e: &Expr, expected: &Type) -> TResult<()> {
        let span = e.span;
        let open = matches!(expected, Type::Meta(_)) && self.recon.is_some();
        let top = matches!(expected, Type::Top) && self.ctx.subtyping_enabled();
        match (&e.kind, expected) {
            // Forms that pass the expected type through unchanged.
            (ExprKind::If(c, t, f), _) => {
                self.check(c, &Type::Bool)?;
                self.check(t, expected)?;
                self.check(f, expected)
            }
            (ExprKind::Match(scrutinee, cases), _) => {
                self.check_match(scrutinee, cases, Some(expected), span).map(|_| ())
            }
            (ExprKind::Let(bindings, body), _) => self.scoped(|t| {
                t.bind_let(bindings)?;
                t.check(body, expected)
            }),
            (ExprKind::LetRec(bindings, body), _) => self.scoped(|t| {
                t.bind_letrec(bindings, span)?;
                t.check(body, expected)
            }),
            (ExprKind::Sequence(first, second), _) => self.check_sequence(first, second, Some(expected)).map(|_| ()),
            (ExprKind::Panic | ExprKind::Throw(_) | ExprKind::TryWith(..) | ExprKind::TryCatch(..), _) => {
                self.check_exceptions(e, Some(expected)).map(|_| ())
            }
            (ExprKind::NatRec(n, z, s), _) if !open => {
                self.check(n, &Type::Nat)?;
                self.check(z, expected)?;
                self.check(s, &nat_rec_step(expected))
            }
            (ExprKind::Fix(f), _) if !open => self.check(f, &Type::func(vec![expected.clone()], expected.clone())),
            _ if open || top => self.check_by_inference(e, expected),

            // Introduction forms.
            (ExprKind::Abstraction { params, ret, body }, Type::Fn(eparams, eret)) => {
                self.check_lambda(params, ret.as_ref(), body, eparams, eret, span)
            }
            (ExprKind::Abstraction { .. }, _) => Err(Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_LAMBDA,
                span,
                format!("expected an expression of non-function type `{}`, found a function", self.show(expected)),
            )),
            (ExprKind::GenericAbstraction { binders, params, ret, body }, Type::Forall(ebinders, ebody))
                if binders.len() == ebinders.len() =>
            {
                self.check_generic_against(binders, params, ret.as_ref(), body, ebinders, ebody, expected, span)
            }
            (ExprKind::Tuple(items), Type::Tuple(ts)) => {
                if items.len() != ts.len() {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_UNEXPECTED_TUPLE_LENGTH,
                        span,
                        format!("expected a tuple of length {}, found one of length {}", ts.len(), items.len()),
                    ));
                }
                items.iter().zip(ts).try_for_each(|(item, t)| self.check(item, t))
            }
            (ExprKind::Tuple(_), _) => Err(self.unexpected_form("a tuple", expected, span)),
            (ExprKind::Record(fields), Type::Record(want)) => self.check_record(fields, want, expected, span),
            (ExprKind::Record(_), _) => Err(self.unexpected_form("a record", expected, span)),
            (ExprKind::Inl(inner), Type::Sum(l, _)) => self.check(inner, l),
            (ExprKind::Inr(inner), Type::Sum(_, r)) => self.check(inner, r),
            (ExprKind::Inl(_) | ExprKind::Inr(_), _) => Err(self.unexpected_form("a sum injection", expected, span)),
            (ExprKind::VariantInj(label, payload), Type::Variant(fields)) => {
                match fields.iter().find(|(l, _)| l == label) {
                    Some((_, t)) => self.check(payload, t),
                    None => Err(Diagnostic::new(
                        ErrorTag::ERROR_UNEXPECTED_VARIANT_LABEL,
                        span,
                        format!("label `{label}` does not occur in variant type `{}`", self.show(expected)),
                    )),
                }
            }
            (ExprKind::VariantInj(..), _) => Err(self.unexpected_form("a variant", expected, span)),
            (ExprKind::ListLiteral(items), Type::List(elem)) => items.iter().try_for_each(|item| self.check(item, elem)),
            (ExprKind::ConsList(head, tail), Type::List(elem)) => {
                self.check(head, elem)?;
                self.check(tail, expected)
            }
            (ExprKind::ListLiteral(_) | ExprKind::ConsList(..), _) => {
                Err(self.unexpected_form("a list", expected, span))
            }
            (ExprKind::NewRef(_), Type::Ref(_)) => self.check_ref_ops(e, Some(expected)).map(|_| ()),
            _ => self.check_by_inference(e, expected),
        }
    }

    fn check_lambda(
        &mut self,
        params: &[Param],
        ret: Option<&Type>,
        body: &Expr,
        eparams: &[Type],
        eret: &Type,
        span: Span,
    ) -> TResult<()> {
        if params.len() != eparams.len() {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_NUMBER_OF_PARAMETERS_IN_LAMBDA,
                span,
                format!("expected a function of {} parameter(s), found one of {}", eparams.len(), params.len()),
            ));
        }
        self.check_param_names(params)?;
        let mut param_types = Vec::with_capacity(params.len());
        for (p, want) in params.iter().zip(eparams) {
            let have = self.elaborate(&p.ty, p.span)?;
            // contravariant: the expected parameter must fit the annotation
            if !self.relate(want, &have, p.span) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_PARAMETER,
                    p.span,
                    format!(
                        "parameter `{}` is annotated `{}` but the expected type is `{}`",
                        p.name,
                        self.show(&have),
                        self.show(want)
                    ),
                ));
            }
            param_types.push(have);
        }
        let ret = ret.map(|r| self.elaborate(r, span)).transpose()?;
        self.scoped(|t| {
            for (p, ty) in params.iter().zip(param_types) {
                t.ctx.bind(p.name.clone(), ty);
            }
            match ret {
                Some(r) => {
                    t.check(body, &r)?;
                    t.expect_type(&r, eret, body.span)
                }
                None => t.check(body, eret),
            }
        })
    }

    fn check_record(&mut self, fields: &[(String, Expr)], want: &[(String, Type)], expected: &Type, span: Span) -> TResult<()> {
        check_distinct_labels(fields, ErrorTag::ERROR_DUPLICATE_RECORD_FIELDS, span)?;
        if let Some((l, _)) = want.iter().find(|(l, _)| !fields.iter().any(|(m, _)| m == l)) {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_MISSING_RECORD_FIELDS,
                span,
                format!("missing field `{l}` of record type `{}`", self.show(expected)),
            ));
        }
        let subtyping = self.ctx.subtyping_enabled();
        if !subtyping {
            if let Some((l, _)) = fields.iter().find(|(l, _)| !want.iter().any(|(m, _)| m == l)) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_UNEXPECTED_RECORD_FIELDS,
                    span,
                    format!("unexpected field `{l}` for record type `{}`", self.show(expected)),
                ));
            }
            if fields.iter().map(|(l, _)| l).ne(want.iter().map(|(l, _)| l)) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
                    span,
                    format!("record fields are not in the order of type `{}`", self.show(expected)),
                )
                .with_note("record types are equal only with the same field order; enable #structural-subtyping"));
            }
        }
        for (label, value) in fields {
            match want.iter().find(|(l, _)| l == label) {
                Some((_, t)) => self.check(value, t)?,
                None => {
                    self.infer(value)?;
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn check_generic_against(
        &mut self,
        binders: &[String],
        params: &[Param],
        ret: Option<&Type>,
        body: &Expr,
        ebinders: &[String],
        ebody: &Type,
        expected: &Type,
        span: Span,
    ) -> TResult<()> {
        let captured = crate::poly::free_type_vars(expected);
        if binders.iter().any(|b| captured.contains(b)) {
            let actual = self.check_generic(binders, params, ret, body, span)?;
            return self.expect_type(&actual, expected, span);
        }
        let opened = crate::poly::instantiate(
            ebinders,
            ebody,
            &binders.iter().map(|b| Type::Var(b.clone())).collect::<Vec<_>>(),
        );
        self.scoped_type_vars(binders, |t| match &opened {
            Type::Fn(eparams, eret) => t.check_lambda(params, ret, body, eparams, eret, span),
            other => Err(t.unexpected_form("a generic function", other, span)),
        })
    }
}

fn nat_rec_step(t: &Type) -> Type {
    Type::func(vec![Type::Nat], Type::func(vec![t.clone()], t.clone()))
}

pub(crate) fn check_distinct_labels<T>(fields: &[(String, T)], tag: ErrorTag, span: Span) -> TResult<()> {
    for (i, (l, _)) in fields.iter().enumerate() {
        if fields[..i].iter().any(|(m, _)| m == l) {
            return Err(Diagnostic::new(tag, span, format!("label `{l}` occurs more than once")));
        }
    }
    Ok(())
}
