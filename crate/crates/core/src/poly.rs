//! Universal and recursive types: free variables, capture-avoiding
//! substitution, alpha-equivalence, and the typing rules for generic
//! functions, type application and `fold`/`unfold`.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::span::Span;
use crate::syntax::{Expr, Param, Type};
use crate::typer::{TResult, Typer};

pub type TypeSubstitution = BTreeMap<String, Type>;

pub fn free_type_vars(t: &Type) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &Type, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Type::Var(name) => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Type::Forall(bs, body) => {
            let n = bound.len();
            bound.extend(bs.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(n);
        }
        Type::Mu(b, body) => {
            bound.push(b.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for child in t.children() {
                collect_free(child, bound, out);
            }
        }
    }
}

/// All variable names occurring in `t`, free or bound.
fn all_type_vars(t: &Type, out: &mut BTreeSet<String>) {
    match t {
        Type::Var(name) => {
            out.insert(name.clone());
        }
        Type::Forall(bs, _) => out.extend(bs.iter().cloned()),
        Type::Mu(b, _) => {
            out.insert(b.clone());
        }
        _ => {}
    }
    for child in t.children() {
        all_type_vars(child, out);
    }
}

/// `base` with trailing digits stripped, followed by the smallest positive
/// integer suffix that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { base } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|candidate| !avoid.contains(candidate))
        .expect("unbounded supply of names")
}

/// Simultaneous capture-avoiding substitution of type variables.
///
/// Binders of `forall`/`µ` that would capture a free variable of an
/// inserted type are renamed with [`fresh_name`].
pub fn substitute(t: &Type, s: &TypeSubstitution) -> Type {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Type::Var(name) => s.get(name).cloned().unwrap_or_else(|| t.clone()),
        Type::Bool | Type::Nat | Type::Unit | Type::Top | Type::Bot | Type::Meta(_) | Type::Alias(_) => t.clone(),
        Type::Fn(ps, r) => Type::Fn(ps.iter().map(|p| substitute(p, s)).collect(), Box::new(substitute(r, s))),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| substitute(t, s)).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), substitute(t, s))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, t)| (l.clone(), substitute(t, s))).collect()),
        Type::Sum(l, r) => Type::sum(substitute(l, s), substitute(r, s)),
        Type::List(t) => Type::list(substitute(t, s)),
        Type::Ref(t) => Type::reference(substitute(t, s)),
        Type::Forall(bs, body) => {
            let (bs, body) = substitute_under_binders(bs, body, s);
            Type::Forall(bs, Box::new(body))
        }
        Type::Mu(b, body) => {
            let (mut bs, body) = substitute_under_binders(std::slice::from_ref(b), body, s);
            Type::Mu(bs.pop().expect("one binder"), Box::new(body))
        }
    }
}

fn substitute_under_binders(binders: &[String], body: &Type, s: &TypeSubstitution) -> (Vec<String>, Type) {
    let body_free = free_type_vars(body);
    // Shadowed entries and entries for variables absent from the body are irrelevant.
    let inner: TypeSubstitution = s
        .iter()
        .filter(|(k, _)| !binders.contains(k) && body_free.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (binders.to_vec(), body.clone());
    }
    let incoming: BTreeSet<String> = inner.values().flat_map(free_type_vars).collect();
    if !binders.iter().any(|b| incoming.contains(b)) {
        return (binders.to_vec(), substitute(body, &inner));
    }
    let mut avoid = incoming;
    avoid.extend(body_free);
    avoid.extend(binders.iter().cloned());
    avoid.extend(inner.keys().cloned());
    all_type_vars(body, &mut avoid);
    let mut renaming = TypeSubstitution::new();
    let mut new_binders = Vec::with_capacity(binders.len());
    for b in binders {
        if avoid.contains(b) && inner.values().any(|v| free_type_vars(v).contains(b)) {
            let fresh = fresh_name(b, &avoid);
            avoid.insert(fresh.clone());
            renaming.insert(b.clone(), Type::Var(fresh.clone()));
            new_binders.push(fresh);
        } else {
            new_binders.push(b.clone());
        }
    }
    let renamed = substitute(body, &renaming);
    (new_binders, substitute(&renamed, &inner))
}

/// Equality up to consistent renaming of `forall`/`µ` binders.
///
/// Record and variant fields are compared in order.
pub fn alpha_eq(a: &Type, b: &Type) -> bool {
    alpha_eq_in(a, b, &mut Vec::new(), &mut Vec::new())
}

fn alpha_eq_in(a: &Type, b: &Type, left: &mut Vec<String>, right: &mut Vec<String>) -> bool {
    fn fields_eq(
        fa: &[(String, Type)],
        fb: &[(String, Type)],
        left: &mut Vec<String>,
        right: &mut Vec<String>,
    ) -> bool {
        fa.len() == fb.len()
            && fa.iter().zip(fb).all(|((la, ta), (lb, tb))| la == lb && alpha_eq_in(ta, tb, left, right))
    }
    match (a, b) {
        (Type::Var(x), Type::Var(y)) => {
            // innermost binding wins
            let ix = left.iter().rposition(|n| n == x);
            let iy = right.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Type::Bool, Type::Bool)
        | (Type::Nat, Type::Nat)
        | (Type::Unit, Type::Unit)
        | (Type::Top, Type::Top)
        | (Type::Bot, Type::Bot) => true,
        (Type::Meta(x), Type::Meta(y)) => x == y,
        (Type::Alias(x), Type::Alias(y)) => x == y,
        (Type::Fn(pa, ra), Type::Fn(pb, rb)) => {
            pa.len() == pb.len()
                && pa.iter().zip(pb).all(|(x, y)| alpha_eq_in(x, y, left, right))
                && alpha_eq_in(ra, rb, left, right)
        }
        (Type::Tuple(ta), Type::Tuple(tb)) => {
            ta.len() == tb.len() && ta.iter().zip(tb).all(|(x, y)| alpha_eq_in(x, y, left, right))
        }
        (Type::Record(fa), Type::Record(fb)) | (Type::Variant(fa), Type::Variant(fb)) => {
            fields_eq(fa, fb, left, right)
        }
        (Type::Sum(la, ra), Type::Sum(lb, rb)) => {
            alpha_eq_in(la, lb, left, right) && alpha_eq_in(ra, rb, left, right)
        }
        (Type::List(x), Type::List(y)) | (Type::Ref(x), Type::Ref(y)) => alpha_eq_in(x, y, left, right),
        (Type::Forall(ba, xa), Type::Forall(bb, xb)) => {
            if ba.len() != bb.len() {
                return false;
            }
            let (nl, nr) = (left.len(), right.len());
            left.extend(ba.iter().cloned());
            right.extend(bb.iter().cloned());
            let eq = alpha_eq_in(xa, xb, left, right);
            left.truncate(nl);
            right.truncate(nr);
            eq
        }
        (Type::Mu(ba, xa), Type::Mu(bb, xb)) => {
            left.push(ba.clone());
            right.push(bb.clone());
            let eq = alpha_eq_in(xa, xb, left, right);
            left.pop();
            right.pop();
            eq
        }
        _ => false,
    }
}

/// One-step unrolling of `µ b. body`: `body[b := µ b. body]`.
pub fn unroll(mu: &Type) -> Option<Type> {
    match mu {
        Type::Mu(b, body) => {
            let mut s = TypeSubstitution::new();
            s.insert(b.clone(), mu.clone());
            Some(substitute(body, &s))
        }
        _ => None,
    }
}

/// Instantiates `forall bs. body` at `args` (arity must already match).
pub fn instantiate(binders: &[String], body: &Type, args: &[Type]) -> Type {
    let s: TypeSubstitution = binders.iter().cloned().zip(args.iter().cloned()).collect();
    substitute(body, &s)
}

impl Typer<'_> {
    /// Checks a generic function or generic lambda and returns its
    /// `forall` type.
    pub(crate) fn check_generic(
        &mut self,
        binders: &[String],
        params: &[Param],
        ret: Option<&Type>,
        body: &Expr,
        span: Span,
    ) -> TResult<Type> {
        self.scoped_type_vars(binders, |t| {
            let fn_ty = t.infer_lambda(params, ret, body, span)?;
            Ok(Type::Forall(binders.to_vec(), Box::new(fn_ty)))
        })
    }

    pub(crate) fn check_type_application(&mut self, f: &Expr, type_args: &[Type], span: Span) -> TResult<Type> {
        let f_ty = self.infer(f)?;
        let args = type_args
            .iter()
            .map(|t| self.elaborate(t, span))
            .collect::<TResult<Vec<_>>>()?;
        match f_ty {
            Type::Forall(binders, body) => {
                if binders.len() != args.len() {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_INCORRECT_NUMBER_OF_TYPE_ARGUMENTS,
                        span,
                        format!("expected {} type argument(s) but got {}", binders.len(), args.len()),
                    ));
                }
                Ok(instantiate(&binders, &body, &args))
            }
            other => Err(Diagnostic::new(
                ErrorTag::ERROR_NOT_A_GENERIC_FUNCTION,
                f.span,
                format!("expression of type `{}` cannot be applied to type arguments", self.show(&other)),
            )),
        }
    }

    /// Typing of `fold[T] e` (`unfold == false`) and `unfold[T] e`.
    pub(crate) fn check_fold_unfold(&mut self, annotation: &Type, e: &Expr, unfold: bool, span: Span) -> TResult<Type> {
        let mu = self.elaborate(annotation, span)?;
        let Some(unrolled) = unroll(&mu) else {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
                span,
                format!("expected a recursive type `µ X. T` in {}, found `{}`", if unfold { "unfold" } else { "fold" }, self.show(&mu)),
            ));
        };
        if unfold {
            self.check(e, &mu)?;
            Ok(unrolled)
        } else {
            self.check(e, &unrolled)?;
            Ok(mu)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subst(pairs: &[(&str, Type)]) -> TypeSubstitution {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn x() -> Type {
        Type::var("X")
    }

    fn y() -> Type {
        Type::var("Y")
    }

    #[test]
    fn substitution_under_binder() {
        let t = Type::forall(&["Y"], Type::func(vec![y()], x()));
        assert_eq!(
            substitute(&t, &subst(&[("X", Type::Nat)])),
            Type::forall(&["Y"], Type::func(vec![y()], Type::Nat))
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = Type::forall(&["Y"], Type::func(vec![y()], x()));
        let out = substitute(&t, &subst(&[("X", y())]));
        assert_eq!(out, Type::forall(&["Y1"], Type::func(vec![Type::var("Y1")], y())));
    }

    #[test]
    fn substitution_without_occurrence() {
        assert_eq!(substitute(&Type::Nat, &subst(&[("X", Type::Bool)])), Type::Nat);
        let shadowed = Type::forall(&["X"], x());
        assert_eq!(substitute(&shadowed, &subst(&[("X", Type::Bool)])), shadowed);
    }

    #[test]
    fn fresh_names_skip_taken_suffixes() {
        let avoid: BTreeSet<String> = ["Y", "Y1", "Y2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_name("Y", &avoid), "Y3");
        assert_eq!(fresh_name("Y1", &avoid), "Y3");
    }

    #[test]
    fn alpha_equivalence() {
        let id = |v: &str| Type::forall(&[v], Type::func(vec![Type::var(v)], Type::var(v)));
        assert!(alpha_eq(&id("X"), &id("Z")));
        let a = Type::forall(&["X", "Y"], Type::func(vec![x()], y()));
        let b = Type::forall(&["A", "B"], Type::func(vec![Type::var("B")], Type::var("A")));
        assert!(!alpha_eq(&a, &b));
        let r = Type::mu("R", Type::sum(Type::Unit, Type::var("R")));
        let s = Type::mu("S", Type::sum(Type::Unit, Type::var("S")));
        assert!(alpha_eq(&r, &s));
        // a bound variable never equals a free one
        assert!(!alpha_eq(&Type::forall(&["X"], x()), &Type::forall(&["Y"], x())));
    }

    #[test]
    fn unrolling() {
        let nat_list = Type::mu("R", Type::sum(Type::Unit, Type::var("R")));
        assert_eq!(unroll(&nat_list).unwrap(), Type::sum(Type::Unit, nat_list.clone()));
        assert_eq!(unroll(&Type::Nat), None);
    }
}
