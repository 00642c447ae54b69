//! Structural subtyping with `Top` and `Bot`, and the `cast as` rule.

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::poly::{alpha_eq, free_type_vars, fresh_name, instantiate};
use crate::span::Span;
use crate::syntax::{Expr, Type};
use crate::typer::{TResult, Typer};

/// `s <: t`. Both types must be alias-free.
///
/// Records: width, depth and permutation. Variants: the labels of `s` are a
/// subset of those of `t`. Functions are contravariant in their parameters;
/// references are invariant. Quantified types are related when their binder
/// lists have the same length and the bodies are related after renaming.
pub fn subtype(s: &Type, t: &Type) -> bool {
    match (s, t) {
        (_, Type::Top) | (Type::Bot, _) => true,
        (Type::Bool, Type::Bool) | (Type::Nat, Type::Nat) | (Type::Unit, Type::Unit) => true,
        (Type::Var(a), Type::Var(b)) => a == b,
        (Type::Meta(a), Type::Meta(b)) => a == b,
        (Type::Fn(ps, r), Type::Fn(qs, u)) => {
            ps.len() == qs.len() && qs.iter().zip(ps).all(|(q, p)| subtype(q, p)) && subtype(r, u)
        }
        (Type::Tuple(xs), Type::Tuple(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| subtype(x, y)),
        (Type::Record(sub), Type::Record(sup)) => sup.iter().all(|(label, want)| {
            sub.iter().find(|(l, _)| l == label).is_some_and(|(_, have)| subtype(have, want))
        }),
        (Type::Variant(sub), Type::Variant(sup)) => sub.iter().all(|(label, have)| {
            sup.iter().find(|(l, _)| l == label).is_some_and(|(_, want)| subtype(have, want))
        }),
        (Type::Sum(a, b), Type::Sum(c, d)) => subtype(a, c) && subtype(b, d),
        (Type::List(a), Type::List(b)) => subtype(a, b),
        (Type::Ref(a), Type::Ref(b)) => subtype(a, b) && subtype(b, a),
        (Type::Forall(bs, x), Type::Forall(cs, y)) => {
            if bs.len() != cs.len() {
                return false;
            }
            let (x, y) = open_binders(s, t, bs, x, cs, y);
            subtype(&x, &y)
        }
        (Type::Mu(b, x), Type::Mu(c, y)) => {
            if alpha_eq(s, t) {
                return true;
            }
            let (x, y) = open_binders(s, t, std::slice::from_ref(b), x, std::slice::from_ref(c), y);
            subtype(&x, &y)
        }
        _ => false,
    }
}

/// Renames the binders of two quantified types to a shared list of names
/// fresh for both, returning the opened bodies.
fn open_binders(s: &Type, t: &Type, bs: &[String], x: &Type, cs: &[String], y: &Type) -> (Type, Type) {
    let mut avoid = free_type_vars(s);
    avoid.extend(free_type_vars(t));
    avoid.extend(bs.iter().cloned());
    avoid.extend(cs.iter().cloned());
    let mut fresh = Vec::with_capacity(bs.len());
    for b in bs {
        let name = fresh_name(b, &avoid);
        avoid.insert(name.clone());
        fresh.push(Type::Var(name));
    }
    (instantiate(bs, x, &fresh), instantiate(cs, y, &fresh))
}

impl Typer<'_> {
    /// `e cast as target`: accepted when the synthesized type and the target
    /// are related by subtyping in either direction.
    pub(crate) fn check_cast(&mut self, e: &Expr, target: &Type, span: Span) -> TResult<Type> {
        let target = self.elaborate(target, span)?;
        let actual = self.infer(e)?;
        if subtype(&actual, &target) || subtype(&target, &actual) {
            Ok(target)
        } else {
            Err(Diagnostic::new(
                ErrorTag::ERROR_UNEXPECTED_SUBTYPE,
                span,
                format!(
                    "cannot cast an expression of type `{}` to unrelated type `{}`",
                    self.show(&actual),
                    self.show(&target)
                ),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_width_and_permutation() {
        let xy = Type::record(&[("x", Type::Nat), ("y", Type::Nat)]);
        let x = Type::record(&[("x", Type::Nat)]);
        assert!(subtype(&xy, &x));
        assert!(!subtype(&x, &xy));
        let yx = Type::record(&[("y", Type::Nat), ("x", Type::Nat)]);
        assert!(subtype(&xy, &yx) && subtype(&yx, &xy));
    }

    #[test]
    fn variant_labels_subset() {
        let v = Type::variant(&[("value", Type::Nat)]);
        let vf = Type::variant(&[("value", Type::Nat), ("failure", Type::Unit)]);
        assert!(subtype(&v, &vf));
        assert!(!subtype(&vf, &v));
    }

    #[test]
    fn function_variance() {
        let x = Type::record(&[("x", Type::Nat)]);
        let xy = Type::record(&[("x", Type::Nat), ("y", Type::Nat)]);
        let f = Type::func(vec![x.clone()], Type::Nat);
        let g = Type::func(vec![xy.clone()], Type::Top);
        assert!(subtype(&f, &g));
        assert!(!subtype(&g, &f));
    }

    #[test]
    fn top_and_bot() {
        assert!(subtype(&Type::Bot, &Type::Nat));
        assert!(subtype(&Type::Nat, &Type::Top));
        assert!(!subtype(&Type::Top, &Type::Nat));
        assert!(!subtype(&Type::Bool, &Type::Nat));
    }

    #[test]
    fn references_are_invariant() {
        let x = Type::record(&[("x", Type::Nat)]);
        let xy = Type::record(&[("x", Type::Nat), ("y", Type::Nat)]);
        assert!(!subtype(&Type::reference(xy.clone()), &Type::reference(x.clone())));
        assert!(subtype(&Type::reference(x.clone()), &Type::reference(x)));
    }

    #[test]
    fn quantifiers() {
        let a = Type::forall(&["X"], Type::func(vec![Type::var("X")], Type::var("X")));
        let b = Type::forall(&["Y"], Type::func(vec![Type::var("Y")], Type::Top));
        assert!(subtype(&a, &b));
        let two = Type::forall(&["X", "Y"], Type::func(vec![Type::var("X")], Type::var("X")));
        assert!(!subtype(&a, &two));
    }
}
