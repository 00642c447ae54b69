//! Type reconstruction: `auto` holes become metavariables, the typer emits
//! equality constraints, and first-order unification solves them.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::poly::{fresh_name, free_type_vars, instantiate};
use crate::span::Span;
use crate::syntax::{print_type, Decl, Expr, ExprKind, FnDecl, LetrecBinding, Param, Pattern, PatternKind, Program, Type};
use crate::typer::{Context, TResult, Typer};

/// `left = right`, produced while checking the expression at `origin`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub left: Type,
    pub right: Type,
    pub origin: Span,
}

impl Constraint {
    pub fn new(left: Type, right: Type, origin: Span) -> Constraint {
        Constraint { left, right, origin }
    }
}

/// A `match` or `let` whose coverage can only be decided once the
/// scrutinee type is known.
#[derive(Clone, Debug)]
pub struct PendingMatch {
    pub patterns: Vec<Pattern>,
    pub ty: Type,
    pub span: Span,
}

/// Reconstruction state carried by the typer.
#[derive(Clone, Debug)]
pub struct Recon {
    pub constraints: Vec<Constraint>,
    pub pending: Vec<PendingMatch>,
    next_meta: u32,
}

impl Recon {
    pub fn new(first_meta: u32) -> Recon {
        Recon { constraints: Vec::new(), pending: Vec::new(), next_meta: first_meta }
    }

    pub fn fresh(&mut self) -> Type {
        let id = self.next_meta;
        self.next_meta += 1;
        Type::Meta(id)
    }
}

/// Solution of a constraint system: metavariable id to type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<u32, Type>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, id: u32) -> Option<&Type> {
        self.map.get(&id)
    }

    pub fn insert(&mut self, id: u32, t: Type) {
        self.map.insert(id, t);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Type)> {
        self.map.iter().map(|(k, v)| (*k, v))
    }
}

impl FromIterator<(u32, Type)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (u32, Type)>>(iter: I) -> Self {
        Substitution { map: iter.into_iter().collect() }
    }
}

/// Replaces every solved metavariable, following chains of bindings.
pub fn apply_substitution(t: &Type, s: &Substitution) -> Type {
    match t {
        Type::Meta(id) => match s.get(*id) {
            Some(bound) => apply_substitution(bound, s),
            None => t.clone(),
        },
        Type::Bool | Type::Nat | Type::Unit | Type::Top | Type::Bot | Type::Var(_) | Type::Alias(_) => t.clone(),
        Type::Fn(ps, r) => Type::Fn(ps.iter().map(|p| apply_substitution(p, s)).collect(), Box::new(apply_substitution(r, s))),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| apply_substitution(t, s)).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), apply_substitution(t, s))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, t)| (l.clone(), apply_substitution(t, s))).collect()),
        Type::Sum(l, r) => Type::sum(apply_substitution(l, s), apply_substitution(r, s)),
        Type::List(t) => Type::list(apply_substitution(t, s)),
        Type::Ref(t) => Type::reference(apply_substitution(t, s)),
        Type::Forall(bs, body) => Type::Forall(bs.clone(), Box::new(apply_substitution(body, s))),
        Type::Mu(b, body) => Type::Mu(b.clone(), Box::new(apply_substitution(body, s))),
    }
}

fn occurs(id: u32, t: &Type) -> bool {
    t.any(&|u| matches!(u, Type::Meta(m) if *m == id))
}

/// Solves `constraints` by first-order unification. The result is
/// idempotent: every bound type is already fully substituted.
pub fn unify(constraints: &[Constraint]) -> TResult<Substitution> {
    let mut s = Substitution::new();
    let mut work: Vec<(Type, Type, Span)> =
        constraints.iter().rev().map(|c| (c.left.clone(), c.right.clone(), c.origin)).collect();
    while let Some((a, b, origin)) = work.pop() {
        let a = resolve_head(&a, &mut s);
        let b = resolve_head(&b, &mut s);
        match (&a, &b) {
            (Type::Meta(x), Type::Meta(y)) if x == y => {}
            (Type::Meta(x), other) | (other, Type::Meta(x)) => {
                let other = apply_substitution(other, &s);
                if occurs(*x, &other) {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE,
                        origin,
                        format!("`{}` would have to contain itself: `{}`", print_type(&a.clone()), print_type(&other)),
                    ));
                }
                s.insert(*x, other);
            }
            _ => decompose(&a, &b, origin, &mut work)?,
        }
    }
    // normalize so that bound types mention no bound metavariables
    let solved = s.iter().map(|(id, t)| (id, apply_substitution(t, &s))).collect();
    Ok(solved)
}

/// Follows a metavariable to its current binding, compressing the path.
fn resolve_head(t: &Type, s: &mut Substitution) -> Type {
    let Type::Meta(id) = t else {
        return t.clone();
    };
    let mut chain = vec![*id];
    let mut current = t.clone();
    while let Type::Meta(m) = current {
        match s.get(m) {
            Some(next) => {
                chain.push(m);
                current = next.clone();
            }
            None => break,
        }
    }
    for m in chain {
        if Type::Meta(m) != current && s.get(m).is_some() {
            s.insert(m, current.clone());
        }
    }
    current
}

fn decompose(a: &Type, b: &Type, origin: Span, work: &mut Vec<(Type, Type, Span)>) -> TResult<()> {
    let clash = || {
        Diagnostic::new(
            ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
            origin,
            format!("cannot unify `{}` with `{}`", print_type(a), print_type(b)),
        )
    };
    let mut push = |x: &Type, y: &Type| work.push((x.clone(), y.clone(), origin));
    match (a, b) {
        (Type::Bool, Type::Bool)
        | (Type::Nat, Type::Nat)
        | (Type::Unit, Type::Unit)
        | (Type::Top, Type::Top)
        | (Type::Bot, Type::Bot) => {}
        (Type::Var(x), Type::Var(y)) | (Type::Alias(x), Type::Alias(y)) if x == y => {}
        (Type::Fn(ps, r), Type::Fn(qs, u)) if ps.len() == qs.len() => {
            push(r, u);
            ps.iter().zip(qs).rev().for_each(|(p, q)| push(p, q));
        }
        (Type::Tuple(xs), Type::Tuple(ys)) if xs.len() == ys.len() => {
            xs.iter().zip(ys).rev().for_each(|(x, y)| push(x, y));
        }
        (Type::Record(xs), Type::Record(ys)) | (Type::Variant(xs), Type::Variant(ys))
            if xs.len() == ys.len() && xs.iter().zip(ys).all(|((l, _), (m, _))| l == m) =>
        {
            xs.iter().zip(ys).rev().for_each(|((_, x), (_, y))| push(x, y));
        }
        (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
            push(b1, b2);
            push(a1, a2);
        }
        (Type::List(x), Type::List(y)) | (Type::Ref(x), Type::Ref(y)) => push(x, y),
        (Type::Forall(bs, x), Type::Forall(cs, y)) if bs.len() == cs.len() => {
            let (x, y) = open_pair(a, b, bs, x, cs, y);
            push(&x, &y);
        }
        (Type::Mu(b1, x), Type::Mu(c1, y)) => {
            let (x, y) = open_pair(a, b, std::slice::from_ref(b1), x, std::slice::from_ref(c1), y);
            push(&x, &y);
        }
        _ => return Err(clash()),
    }
    Ok(())
}

fn open_pair(a: &Type, b: &Type, bs: &[String], x: &Type, cs: &[String], y: &Type) -> (Type, Type) {
    let mut avoid: BTreeSet<String> = free_type_vars(a);
    avoid.extend(free_type_vars(b));
    avoid.extend(bs.iter().cloned());
    avoid.extend(cs.iter().cloned());
    let mut fresh = Vec::new();
    for base in bs {
        let n = fresh_name(base, &avoid);
        avoid.insert(n.clone());
        fresh.push(Type::Var(n));
    }
    (instantiate(bs, x, &fresh), instantiate(cs, y, &fresh))
}

/// Runs the typer in reconstruction mode on `e` against `expected`,
/// returning the constraints it emitted. Fresh metavariables start above
/// every id occurring in `e`, `expected` and the context.
pub fn generate_constraints(ctx: &mut Context, e: &Expr, expected: &Type) -> TResult<Vec<Constraint>> {
    let first = max_meta_in_expr(e).max(max_meta(expected)).max(ctx.vars().iter().map(|(_, t)| max_meta(t)).max().unwrap_or(0));
    let mut typer = Typer::reconstructing(ctx, first + 1);
    typer.check(e, expected)?;
    Ok(typer.take_recon().map(|r| r.constraints).unwrap_or_default())
}

fn max_meta(t: &Type) -> u32 {
    match t {
        Type::Meta(id) => *id,
        _ => t.children().into_iter().map(max_meta).max().unwrap_or(0),
    }
}

/// Largest metavariable id written in the program's annotations.
pub fn max_meta_in_program(p: &Program) -> u32 {
    p.decls.iter().map(max_meta_in_decl).max().unwrap_or(0)
}

fn max_meta_in_decl(d: &Decl) -> u32 {
    match d {
        Decl::Fn(f) => {
            let params = f.params.iter().map(|p| max_meta(&p.ty)).max().unwrap_or(0);
            let nested = f.nested.iter().map(max_meta_in_decl).max().unwrap_or(0);
            params.max(max_meta(&f.ret)).max(nested).max(max_meta_in_expr(&f.body))
        }
        Decl::TypeAlias { ty, .. } | Decl::ExceptionType { ty, .. } | Decl::ExceptionVariant { ty, .. } => max_meta(ty),
    }
}

fn max_meta_in_expr(e: &Expr) -> u32 {
    let mut best = 0;
    map_expr_types(&mut e.clone(), &mut |t| {
        best = best.max(max_meta(t));
    });
    best
}

/// Whether any annotation in the program is an `auto` hole.
pub fn program_has_holes(p: &Program) -> bool {
    let mut found = false;
    let mut copy = p.clone();
    map_program_types(&mut copy, &mut |t| found |= t.contains_meta());
    found
}

/// Replaces every hole in the program's annotations by its solution.
/// Unconstrained holes default to `Nat`.
pub fn annotate(p: &Program, s: &Substitution) -> Program {
    let mut out = p.clone();
    map_program_types(&mut out, &mut |t| {
        *t = ground(&apply_substitution(t, s));
    });
    out
}

fn ground(t: &Type) -> Type {
    match t {
        Type::Meta(_) => Type::Nat,
        Type::Bool | Type::Nat | Type::Unit | Type::Top | Type::Bot | Type::Var(_) | Type::Alias(_) => t.clone(),
        Type::Fn(ps, r) => Type::Fn(ps.iter().map(ground).collect(), Box::new(ground(r))),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(ground).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), ground(t))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, t)| (l.clone(), ground(t))).collect()),
        Type::Sum(l, r) => Type::sum(ground(l), ground(r)),
        Type::List(t) => Type::list(ground(t)),
        Type::Ref(t) => Type::reference(ground(t)),
        Type::Forall(bs, b) => Type::Forall(bs.clone(), Box::new(ground(b))),
        Type::Mu(b, body) => Type::Mu(b.clone(), Box::new(ground(body))),
    }
}

fn map_program_types(p: &mut Program, f: &mut dyn FnMut(&mut Type)) {
    for d in &mut p.decls {
        map_decl_types(d, f);
    }
}

fn map_decl_types(d: &mut Decl, f: &mut dyn FnMut(&mut Type)) {
    match d {
        Decl::Fn(FnDecl { params, ret, nested, body, .. }) => {
            map_params(params, f);
            f(ret);
            for n in nested {
                map_decl_types(n, f);
            }
            map_expr_types(body, f);
        }
        Decl::TypeAlias { ty, .. } | Decl::ExceptionType { ty, .. } | Decl::ExceptionVariant { ty, .. } => f(ty),
    }
}

fn map_params(params: &mut [Param], f: &mut dyn FnMut(&mut Type)) {
    for p in params {
        f(&mut p.ty);
    }
}

fn map_pattern_types(p: &mut Pattern, f: &mut dyn FnMut(&mut Type)) {
    match &mut p.kind {
        PatternKind::Ascription(inner, t) => {
            f(t);
            map_pattern_types(inner, f);
        }
        PatternKind::Succ(q) | PatternKind::Inl(q) | PatternKind::Inr(q) | PatternKind::Variant(_, q) => {
            map_pattern_types(q, f)
        }
        PatternKind::Tuple(ps) | PatternKind::List(ps) => ps.iter_mut().for_each(|q| map_pattern_types(q, f)),
        PatternKind::Record(fs) => fs.iter_mut().for_each(|(_, q)| map_pattern_types(q, f)),
        PatternKind::Cons(h, t) => {
            map_pattern_types(h, f);
            map_pattern_types(t, f);
        }
        _ => {}
    }
}

/// Visits every type annotation inside an expression.
fn map_expr_types(e: &mut Expr, f: &mut dyn FnMut(&mut Type)) {
    let sub = |e: &mut Expr, f: &mut dyn FnMut(&mut Type)| map_expr_types(e, f);
    match &mut e.kind {
        ExprKind::Var(_)
        | ExprKind::True
        | ExprKind::False
        | ExprKind::Unit
        | ExprKind::Zero
        | ExprKind::NatLiteral(_)
        | ExprKind::Panic => {}
        ExprKind::Succ(a)
        | ExprKind::NatIsZero(a)
        | ExprKind::NatPred(a)
        | ExprKind::TupleProj(a, _)
        | ExprKind::RecordProj(a, _)
        | ExprKind::Inl(a)
        | ExprKind::Inr(a)
        | ExprKind::VariantInj(_, a)
        | ExprKind::ListHead(a)
        | ExprKind::ListTail(a)
        | ExprKind::ListIsEmpty(a)
        | ExprKind::NewRef(a)
        | ExprKind::Deref(a)
        | ExprKind::Throw(a)
        | ExprKind::Fix(a) => sub(a, f),
        ExprKind::NatRec(a, b, c) | ExprKind::If(a, b, c) => {
            sub(a, f);
            sub(b, f);
            sub(c, f);
        }
        ExprKind::Abstraction { params, ret, body } => {
            map_params(params, f);
            if let Some(r) = ret {
                f(r);
            }
            sub(body, f);
        }
        ExprKind::GenericAbstraction { params, ret, body, .. } => {
            map_params(params, f);
            if let Some(r) = ret {
                f(r);
            }
            sub(body, f);
        }
        ExprKind::Application(g, args) => {
            sub(g, f);
            args.iter_mut().for_each(|a| sub(a, f));
        }
        ExprKind::TypeApplication(g, ts) => {
            sub(g, f);
            ts.iter_mut().for_each(|t| f(t));
        }
        ExprKind::Tuple(es) | ExprKind::ListLiteral(es) => es.iter_mut().for_each(|a| sub(a, f)),
        ExprKind::Record(fs) => fs.iter_mut().for_each(|(_, a)| sub(a, f)),
        ExprKind::ConsList(a, b)
        | ExprKind::Sequence(a, b)
        | ExprKind::Assign(a, b)
        | ExprKind::TryWith(a, b) => {
            sub(a, f);
            sub(b, f);
        }
        ExprKind::Match(s, cases) => {
            sub(s, f);
            for c in cases {
                map_pattern_types(&mut c.pattern, f);
                sub(&mut c.body, f);
            }
        }
        ExprKind::Let(bindings, body) => {
            for (p, v) in bindings {
                map_pattern_types(p, f);
                sub(v, f);
            }
            sub(body, f);
        }
        ExprKind::LetRec(bindings, body) => {
            for LetrecBinding { ty, value, .. } in bindings {
                f(ty);
                sub(value, f);
            }
            sub(body, f);
        }
        ExprKind::Ascription(a, t) | ExprKind::CastAs(a, t) | ExprKind::Fold(t, a) | ExprKind::Unfold(t, a) => {
            f(t);
            sub(a, f);
        }
        ExprKind::TryCatch(a, p, b) => {
            sub(a, f);
            map_pattern_types(p, f);
            sub(b, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(id: u32) -> Type {
        Type::Meta(id)
    }

    fn c(a: Type, b: Type) -> Constraint {
        Constraint::new(a, b, Span::DUMMY)
    }

    #[test]
    fn single_binding() {
        let s = unify(&[c(m(1), Type::Nat)]).unwrap();
        assert_eq!(s.get(1), Some(&Type::Nat));
    }

    #[test]
    fn decomposes_functions() {
        let s = unify(&[c(Type::func(vec![m(1)], Type::Bool), Type::func(vec![Type::Nat], m(2)))]).unwrap();
        assert_eq!(s.get(1), Some(&Type::Nat));
        assert_eq!(s.get(2), Some(&Type::Bool));
    }

    #[test]
    fn occurs_check() {
        let err = unify(&[c(m(1), Type::func(vec![m(1)], Type::Nat))]).unwrap_err();
        assert_eq!(err.tag, ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE);
    }

    #[test]
    fn clash_reports_mismatch() {
        let err = unify(&[c(m(1), Type::Nat), c(m(1), Type::Bool)]).unwrap_err();
        assert_eq!(err.tag, ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION);
    }

    #[test]
    fn chains_are_followed() {
        let s: Substitution = [(1, m(2)), (2, Type::Bool)].into_iter().collect();
        assert_eq!(apply_substitution(&m(1), &s), Type::Bool);
        let t = Type::func(vec![m(1)], m(1));
        let once = apply_substitution(&t, &s);
        assert_eq!(apply_substitution(&once, &s), once);
    }

    #[test]
    fn empty_substitution_is_identity() {
        let t = Type::func(vec![m(3)], Type::list(Type::Nat));
        assert_eq!(apply_substitution(&t, &Substitution::new()), t);
    }
}
