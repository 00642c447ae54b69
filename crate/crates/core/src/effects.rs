//! References, sequencing, `panic!` and exceptions.

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::syntax::{Expr, ExprKind, Type};
use crate::typer::{TResult, Typer};

/// How thrown values are typed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ExceptionEnv {
    /// No exception declaration: `throw` is rejected.
    #[default]
    None,
    /// `exception type = T`.
    Fixed(Type),
    /// `exception variant l : T` declarations, in order.
    Open(Vec<(String, Type)>),
}

impl ExceptionEnv {
    /// Type of values that may be thrown. Open variant declarations are
    /// equivalent to one variant type with those labels.
    pub fn carrier(&self) -> Option<Type> {
        match self {
            ExceptionEnv::None => None,
            ExceptionEnv::Fixed(t) => Some(t.clone()),
            ExceptionEnv::Open(fields) => Some(Type::Variant(fields.clone())),
        }
    }
}

impl Typer<'_> {
    /// `new(e)`, `*e` and `l := r`.
    pub(crate) fn check_ref_ops(&mut self, e: &Expr, expected: Option<&Type>) -> TResult<Type> {
        let span = e.span;
        let ty = match &e.kind {
            ExprKind::NewRef(init) => match expected {
                Some(Type::Ref(inner)) => {
                    self.check(init, inner)?;
                    return Ok(Type::reference((**inner).clone()));
                }
                _ => Type::reference(self.infer(init)?),
            },
            ExprKind::Deref(r) => self.reference_content(r)?,
            ExprKind::Assign(l, r) => {
                let content = self.reference_content(l)?;
                self.check(r, &content)?;
                Type::Unit
            }
            _ => unreachable!("not a reference operation"),
        };
        if let Some(expected) = expected {
            self.expect_type(&ty, expected, span)?;
        }
        Ok(ty)
    }

    fn reference_content(&mut self, r: &Expr) -> TResult<Type> {
        let ty = self.infer(r)?;
        let ty = self.meta_shape(&ty, r.span, |rc| Type::reference(rc.fresh())).unwrap_or(ty);
        match ty {
            Type::Ref(inner) => Ok(*inner),
            other => Err(Diagnostic::new(
                ErrorTag::ERROR_NOT_A_REFERENCE,
                r.span,
                format!("expected a reference, found an expression of type `{}`", self.show(&other)),
            )),
        }
    }

    /// `e1; e2`: `e1` must be `Unit`.
    pub(crate) fn check_sequence(&mut self, first: &Expr, second: &Expr, expected: Option<&Type>) -> TResult<Type> {
        self.check(first, &Type::Unit)?;
        match expected {
            Some(t) => {
                self.check(second, t)?;
                Ok(t.clone())
            }
            None => self.infer(second),
        }
    }

    /// `panic!`, `throw(e)`, `try { e } with { e }` and
    /// `try { e } catch { p => e }`.
    pub(crate) fn check_exceptions(&mut self, e: &Expr, expected: Option<&Type>) -> TResult<Type> {
        let span = e.span;
        match &e.kind {
            ExprKind::Panic => match expected.cloned().or_else(|| self.fresh_meta()) {
                Some(t) => Ok(t),
                None => Err(Diagnostic::new(
                    ErrorTag::ERROR_AMBIGUOUS_PANIC_TYPE,
                    span,
                    "cannot infer the type of `panic!`; add a type annotation",
                )),
            },
            ExprKind::Throw(value) => {
                let carrier = self.declared_exception_type(span)?;
                self.check(value, &carrier)?;
                match expected.cloned().or_else(|| self.fresh_meta()) {
                    Some(t) => Ok(t),
                    None => Err(Diagnostic::new(
                        ErrorTag::ERROR_AMBIGUOUS_THROW_TYPE,
                        span,
                        "cannot infer the type of `throw`; add a type annotation",
                    )),
                }
            }
            ExprKind::TryWith(body, fallback) => match expected {
                Some(t) => {
                    self.check(body, t)?;
                    self.check(fallback, t)?;
                    Ok(t.clone())
                }
                None => {
                    let t = self.infer(body)?;
                    self.check(fallback, &t)?;
                    Ok(t)
                }
            },
            ExprKind::TryCatch(body, pattern, handler) => {
                let carrier = self.declared_exception_type(span)?;
                let t = match expected {
                    Some(t) => {
                        self.check(body, t)?;
                        t.clone()
                    }
                    None => self.infer(body)?,
                };
                self.gate_pattern(pattern)?;
                let bindings = self.pattern_bindings(pattern, &carrier)?;
                self.scoped(|tc| {
                    for (name, ty) in bindings {
                        tc.ctx.bind(name, ty);
                    }
                    tc.check(handler, &t)
                })?;
                Ok(t)
            }
            _ => unreachable!("not an exception form"),
        }
    }

    fn declared_exception_type(&self, span: crate::span::Span) -> TResult<Type> {
        self.ctx.exception_type().ok_or_else(|| {
            Diagnostic::new(
                ErrorTag::ERROR_EXCEPTION_TYPE_NOT_DECLARED,
                span,
                "no exception type is declared; add `exception type = T` or `exception variant` declarations",
            )
        })
    }
}
