//! Random generators and brute-force oracles used by the property suites.
//! Compiled only with the `test-support` feature.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::interp::Value;
use crate::parser::parse_expr;
use crate::poly::{free_type_vars, fresh_name, instantiate, unroll};
use crate::reconstruct::Constraint;
use crate::span::Span;
use crate::syntax::{Pattern, PatternKind, Program, Type};
use crate::typer::{check, Context};

const LABELS: &[&str] = &["a", "b", "c", "d", "e"];

fn pick_labels<R: Rng>(rng: &mut R, min: usize) -> Vec<String> {
    let n = rng.gen_range(min..=3);
    let mut labels: Vec<&str> = LABELS.to_vec();
    labels.shuffle(rng);
    labels.into_iter().take(n).map(String::from).collect()
}

/// Closed, alias-free, metavariable-free type of depth at most `depth`.
pub fn random_type<R: Rng>(rng: &mut R, depth: usize) -> Type {
    random_type_in(rng, depth, &mut Vec::new())
}

fn random_type_in<R: Rng>(rng: &mut R, depth: usize, bound: &mut Vec<String>) -> Type {
    let leaves = 5 + usize::from(!bound.is_empty());
    let choice = if depth == 0 { rng.gen_range(0..leaves) } else { rng.gen_range(0..leaves + 10) };
    match choice {
        0 => Type::Nat,
        1 => Type::Bool,
        2 => Type::Unit,
        3 => Type::Top,
        4 => Type::Bot,
        5 if !bound.is_empty() => Type::Var(bound.choose(rng).expect("nonempty").clone()),
        _ => {
            let d = depth - 1;
            match rng.gen_range(0..10) {
                0 => {
                    let n = rng.gen_range(1..=2);
                    Type::Fn((0..n).map(|_| random_type_in(rng, d, bound)).collect(), Box::new(random_type_in(rng, d, bound)))
                }
                1 => Type::Tuple((0..rng.gen_range(2..=3)).map(|_| random_type_in(rng, d, bound)).collect()),
                2 => Type::Record(pick_labels(rng, 1).into_iter().map(|l| (l, random_type_in(rng, d, bound))).collect()),
                3 => Type::Variant(pick_labels(rng, 1).into_iter().map(|l| (l, random_type_in(rng, d, bound))).collect()),
                4 => Type::sum(random_type_in(rng, d, bound), random_type_in(rng, d, bound)),
                5 => Type::list(random_type_in(rng, d, bound)),
                6 => Type::reference(random_type_in(rng, d, bound)),
                7 => {
                    let name = ["X", "Y", "Z"].choose(rng).expect("nonempty").to_string();
                    bound.push(name.clone());
                    let body = random_type_in(rng, d, bound);
                    bound.pop();
                    Type::Forall(vec![name], Box::new(body))
                }
                8 => {
                    let name = ["R", "S"].choose(rng).expect("nonempty").to_string();
                    bound.push(name.clone());
                    let body = random_type_in(rng, d, bound);
                    bound.pop();
                    Type::Mu(name, Box::new(body))
                }
                _ => Type::Nat,
            }
        }
    }
}

/// A type `s` with `s <: t`, built by applying subtyping rules backwards.
pub fn random_subtype<R: Rng>(rng: &mut R, t: &Type, depth: usize) -> Type {
    if rng.gen_ratio(1, 12) {
        return Type::Bot;
    }
    match t {
        Type::Top => {
            if rng.gen_bool(0.5) {
                Type::Top
            } else {
                random_type(rng, depth)
            }
        }
        Type::Fn(ps, r) => Type::Fn(
            ps.iter().map(|p| random_supertype(rng, p, depth)).collect(),
            Box::new(random_subtype(rng, r, depth)),
        ),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| random_subtype(rng, t, depth)).collect()),
        Type::Record(fs) => {
            let mut out: Vec<(String, Type)> = fs.iter().map(|(l, t)| (l.clone(), random_subtype(rng, t, depth))).collect();
            for l in LABELS {
                if rng.gen_ratio(1, 6) && !out.iter().any(|(m, _)| m == l) {
                    out.push((l.to_string(), random_type(rng, depth.min(1))));
                }
            }
            out.shuffle(rng);
            Type::Record(out)
        }
        Type::Variant(fs) => {
            let kept: Vec<&(String, Type)> = fs.iter().filter(|_| rng.gen_bool(0.7)).collect();
            let mut out: Vec<(String, Type)> = kept.into_iter().map(|(l, t)| (l.clone(), random_subtype(rng, t, depth))).collect();
            if out.is_empty() {
                let (l, t) = &fs[0];
                out.push((l.clone(), random_subtype(rng, t, depth)));
            }
            out.shuffle(rng);
            Type::Variant(out)
        }
        Type::Sum(a, b) => Type::sum(random_subtype(rng, a, depth), random_subtype(rng, b, depth)),
        Type::List(a) => Type::list(random_subtype(rng, a, depth)),
        _ => t.clone(),
    }
}

/// A type `s` with `t <: s`.
pub fn random_supertype<R: Rng>(rng: &mut R, t: &Type, depth: usize) -> Type {
    if rng.gen_ratio(1, 12) {
        return Type::Top;
    }
    match t {
        Type::Bot => {
            if rng.gen_bool(0.5) {
                Type::Bot
            } else {
                random_type(rng, depth)
            }
        }
        Type::Fn(ps, r) => Type::Fn(
            ps.iter().map(|p| random_subtype(rng, p, depth)).collect(),
            Box::new(random_supertype(rng, r, depth)),
        ),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| random_supertype(rng, t, depth)).collect()),
        Type::Record(fs) => {
            let kept: Vec<&(String, Type)> = fs.iter().filter(|_| rng.gen_bool(0.7)).collect();
            let mut out: Vec<(String, Type)> = kept.into_iter().map(|(l, t)| (l.clone(), random_supertype(rng, t, depth))).collect();
            out.shuffle(rng);
            Type::Record(out)
        }
        Type::Variant(fs) => {
            let mut out: Vec<(String, Type)> = fs.iter().map(|(l, t)| (l.clone(), random_supertype(rng, t, depth))).collect();
            for l in LABELS {
                if rng.gen_ratio(1, 6) && !out.iter().any(|(m, _)| m == l) {
                    out.push((l.to_string(), random_type(rng, depth.min(1))));
                }
            }
            out.shuffle(rng);
            Type::Variant(out)
        }
        Type::Sum(a, b) => Type::sum(random_supertype(rng, a, depth), random_supertype(rng, b, depth)),
        Type::List(a) => Type::list(random_supertype(rng, a, depth)),
        _ => t.clone(),
    }
}

/// Type built from `Bool`, `Unit`, sums, variants, tuples and records
/// only, so its value space is finite.
pub fn random_finite_type<R: Rng>(rng: &mut R, depth: usize) -> Type {
    let choice = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    let d = depth.saturating_sub(1);
    match choice {
        0 => Type::Bool,
        1 => Type::Unit,
        2 => Type::sum(random_finite_type(rng, d), random_finite_type(rng, d)),
        3 => Type::Variant(pick_labels(rng, 1).into_iter().map(|l| (l, random_finite_type(rng, d))).collect()),
        4 => Type::Tuple((0..2).map(|_| random_finite_type(rng, d)).collect()),
        _ => Type::Record(pick_labels(rng, 1).into_iter().map(|l| (l, random_finite_type(rng, d))).collect()),
    }
}

/// Every value of a finite type, or `None` when the type is not finite or
/// has more than `limit` values.
pub fn enumerate_values(t: &Type, limit: usize) -> Option<Vec<Value<'static>>> {
    let out = match t {
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Unit => vec![Value::Unit],
        Type::Bot => vec![],
        Type::Sum(a, b) => {
            let mut out: Vec<Value> = enumerate_values(a, limit)?.into_iter().map(|v| Value::Inl(Box::new(v))).collect();
            out.extend(enumerate_values(b, limit)?.into_iter().map(|v| Value::Inr(Box::new(v))));
            out
        }
        Type::Variant(fs) => {
            let mut out = Vec::new();
            for (l, t) in fs {
                out.extend(enumerate_values(t, limit)?.into_iter().map(|v| Value::Variant(l.clone(), Box::new(v))));
            }
            out
        }
        Type::Tuple(ts) => product(ts.iter().collect(), limit)?.into_iter().map(Value::Tuple).collect(),
        Type::Record(fs) => product(fs.iter().map(|(_, t)| t).collect(), limit)?
            .into_iter()
            .map(|vs| Value::Record(fs.iter().map(|(l, _)| l.clone()).zip(vs).collect()))
            .collect(),
        _ => return None,
    };
    (out.len() <= limit).then_some(out)
}

fn product(ts: Vec<&Type>, limit: usize) -> Option<Vec<Vec<Value<'static>>>> {
    let mut rows: Vec<Vec<Value<'static>>> = vec![vec![]];
    for t in ts {
        let values = enumerate_values(t, limit)?;
        let mut next = Vec::new();
        for row in &rows {
            for v in &values {
                let mut r = row.clone();
                r.push(v.clone());
                next.push(r);
                if next.len() > limit {
                    return None;
                }
            }
        }
        rows = next;
    }
    Some(rows)
}

/// Whether `p` matches `v`, by direct structural comparison.
pub fn pattern_matches(p: &Pattern, v: &Value<'_>) -> bool {
    match (&p.kind, v) {
        (PatternKind::Var(_) | PatternKind::Wildcard, _) => true,
        (PatternKind::Ascription(inner, _), _) => pattern_matches(inner, v),
        (PatternKind::True, Value::Bool(b)) => *b,
        (PatternKind::False, Value::Bool(b)) => !*b,
        (PatternKind::Unit, Value::Unit) => true,
        (PatternKind::Inl(q), Value::Inl(x)) | (PatternKind::Inr(q), Value::Inr(x)) => pattern_matches(q, x),
        (PatternKind::Variant(l, q), Value::Variant(m, x)) => l == m && pattern_matches(q, x),
        (PatternKind::Tuple(ps), Value::Tuple(vs)) => ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| pattern_matches(p, v)),
        (PatternKind::Record(ps), Value::Record(fs)) => ps
            .iter()
            .all(|(l, p)| fs.iter().find(|(m, _)| m == l).is_some_and(|(_, v)| pattern_matches(p, v))),
        _ => false,
    }
}

/// Oracle for exhaustiveness: every enumerated value matches some pattern.
pub fn covers_all_values(t: &Type, patterns: &[&Pattern], limit: usize) -> Option<bool> {
    let values = enumerate_values(t, limit)?;
    Some(values.iter().all(|v| patterns.iter().any(|p| pattern_matches(p, v))))
}

fn binder<R: Rng>(rng: &mut R) -> Pattern {
    if rng.gen_bool(0.5) {
        Pattern::synthetic(PatternKind::Wildcard)
    } else {
        Pattern::synthetic(PatternKind::Var("x".into()))
    }
}

/// A random simple pattern that typechecks against `t`.
pub fn random_simple_pattern<R: Rng>(rng: &mut R, t: &Type) -> Pattern {
    if rng.gen_ratio(1, 8) {
        return binder(rng);
    }
    let kind = match t {
        Type::Bool => {
            if rng.gen_bool(0.5) {
                PatternKind::True
            } else {
                PatternKind::False
            }
        }
        Type::Unit => PatternKind::Unit,
        Type::Sum(..) => {
            if rng.gen_bool(0.5) {
                PatternKind::Inl(Box::new(binder(rng)))
            } else {
                PatternKind::Inr(Box::new(binder(rng)))
            }
        }
        Type::Variant(fs) => {
            let (l, _) = fs.choose(rng).expect("variant has labels");
            PatternKind::Variant(l.clone(), Box::new(binder(rng)))
        }
        Type::Tuple(ts) => PatternKind::Tuple(ts.iter().map(|_| Pattern::synthetic(PatternKind::Wildcard)).collect()),
        Type::Record(fs) => PatternKind::Record(fs.iter().map(|(l, _)| (l.clone(), Pattern::synthetic(PatternKind::Wildcard))).collect()),
        _ => return binder(rng),
    };
    Pattern::synthetic(kind)
}

/// Ground type without binders, for unification tests.
pub fn random_ground_type<R: Rng>(rng: &mut R, depth: usize) -> Type {
    let choice = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..9) };
    let d = depth.saturating_sub(1);
    match choice {
        0 => Type::Nat,
        1 => Type::Bool,
        2 => Type::Unit,
        3 => Type::func(vec![random_ground_type(rng, d)], random_ground_type(rng, d)),
        4 => Type::Tuple(vec![random_ground_type(rng, d), random_ground_type(rng, d)]),
        5 => Type::list(random_ground_type(rng, d)),
        6 => Type::reference(random_ground_type(rng, d)),
        7 => Type::sum(random_ground_type(rng, d), random_ground_type(rng, d)),
        _ => Type::Record(vec![("a".into(), random_ground_type(rng, d)), ("b".into(), random_ground_type(rng, d))]),
    }
}

/// Replaces random subtrees of `t` by metavariables drawn from `metas`;
/// records each replacement so that the original is recoverable.
pub fn punch_holes<R: Rng>(rng: &mut R, t: &Type, metas: &mut Vec<(u32, Type)>, next: &mut u32) -> Type {
    if rng.gen_ratio(1, 4) {
        // reuse an existing metavariable standing for an equal type
        if let Some((id, _)) = metas.iter().find(|(_, u)| u == t) {
            return Type::Meta(*id);
        }
        let id = *next;
        *next += 1;
        metas.push((id, t.clone()));
        return Type::Meta(id);
    }
    match t {
        Type::Fn(ps, r) => Type::Fn(
            ps.iter().map(|p| punch_holes(rng, p, metas, next)).collect(),
            Box::new(punch_holes(rng, r, metas, next)),
        ),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| punch_holes(rng, t, metas, next)).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), punch_holes(rng, t, metas, next))).collect()),
        Type::Sum(a, b) => Type::sum(punch_holes(rng, a, metas, next), punch_holes(rng, b, metas, next)),
        Type::List(a) => Type::list(punch_holes(rng, a, metas, next)),
        Type::Ref(a) => Type::reference(punch_holes(rng, a, metas, next)),
        _ => t.clone(),
    }
}

/// A solvable constraint system: each constraint equates two independently
/// holed copies of one random ground type, with metavariables shared
/// across constraints.
pub fn random_solvable_system<R: Rng>(rng: &mut R) -> Vec<Constraint> {
    let mut metas = Vec::new();
    let mut next = 1;
    (0..rng.gen_range(1..=4))
        .map(|_| {
            let t = random_ground_type(rng, 3);
            let left = punch_holes(rng, &t, &mut metas, &mut next);
            let right = punch_holes(rng, &t, &mut metas, &mut next);
            Constraint::new(left, right, Span::DUMMY)
        })
        .collect()
}

/// A system whose only solution would be an infinite type.
pub fn random_occurs_system<R: Rng>(rng: &mut R) -> Vec<Constraint> {
    let m = Type::Meta(1);
    let wrapped = match rng.gen_range(0..4) {
        0 => Type::func(vec![m.clone()], random_ground_type(rng, 1)),
        1 => Type::list(m.clone()),
        2 => Type::Tuple(vec![random_ground_type(rng, 1), m.clone()]),
        _ => Type::reference(Type::func(vec![Type::Nat], m.clone())),
    };
    let mut system = vec![Constraint::new(m, wrapped, Span::DUMMY)];
    if rng.gen_bool(0.5) {
        system.insert(0, Constraint::new(Type::Meta(2), random_ground_type(rng, 2), Span::DUMMY));
    }
    system
}

/// Type over binders from a small name pool, with free variables drawn
/// from `free` so that substitution can capture.
pub fn random_open_type<R: Rng>(rng: &mut R, depth: usize, free: &[&str]) -> Type {
    let mut bound: Vec<String> = free.iter().map(|s| s.to_string()).collect();
    random_type_in(rng, depth, &mut bound)
}

/// Renames every binder in `t` to a fresh name.
pub fn alpha_rename(t: &Type) -> Type {
    let mut avoid = free_type_vars(t);
    rename_binders(t, &mut avoid)
}

fn rename_binders(t: &Type, avoid: &mut BTreeSet<String>) -> Type {
    match t {
        Type::Forall(bs, body) => {
            let fresh: Vec<String> = bs
                .iter()
                .map(|b| {
                    let n = fresh_name(&format!("{b}q"), avoid);
                    avoid.insert(n.clone());
                    n
                })
                .collect();
            let body = instantiate(bs, body, &fresh.iter().map(|n| Type::Var(n.clone())).collect::<Vec<_>>());
            Type::Forall(fresh, Box::new(rename_binders(&body, avoid)))
        }
        Type::Mu(b, body) => {
            let n = fresh_name(&format!("{b}q"), avoid);
            avoid.insert(n.clone());
            let body = instantiate(std::slice::from_ref(b), body, &[Type::Var(n.clone())]);
            Type::Mu(n, Box::new(rename_binders(&body, avoid)))
        }
        Type::Fn(ps, r) => Type::Fn(ps.iter().map(|p| rename_binders(p, avoid)).collect(), Box::new(rename_binders(r, avoid))),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| rename_binders(t, avoid)).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), rename_binders(t, avoid))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, t)| (l.clone(), rename_binders(t, avoid))).collect()),
        Type::Sum(a, b) => Type::sum(rename_binders(a, avoid), rename_binders(b, avoid)),
        Type::List(a) => Type::list(rename_binders(a, avoid)),
        Type::Ref(a) => Type::reference(rename_binders(a, avoid)),
        _ => t.clone(),
    }
}

/// Re-checks a result of `program` against `t`: the value is printed,
/// parsed back as an expression and checked under the program's
/// extensions. Values that have no source form (closures, locations) are
/// compared structurally instead.
pub fn value_rechecks(program: &Program, v: &Value<'_>, t: &Type) -> Result<(), String> {
    let printed = v.to_string();
    if printed.contains("<fun>") || printed.contains("<location") {
        return if conforms(v, t) { Ok(()) } else { Err(format!("{printed} does not have shape {t:?}")) };
    }
    let e = parse_expr(&printed).map_err(|e| format!("{printed}: {e}"))?;
    let mut ctx = Context::with_extensions(program.extensions.iter().filter_map(|n| n.resolve().known()));
    ctx.permissive = true;
    check(&mut ctx, &e, t).map_err(|d| format!("{printed}: {d:?}"))
}

fn conforms(v: &Value<'_>, t: &Type) -> bool {
    match (v, t) {
        (_, Type::Top) => true,
        (Value::Nat(_), Type::Nat) | (Value::Bool(_), Type::Bool) | (Value::Unit, Type::Unit) => true,
        (Value::Location(_), Type::Ref(_)) => true,
        (_, Type::Fn(..) | Type::Forall(..)) => v.is_function(),
        (Value::Tuple(vs), Type::Tuple(ts)) => vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| conforms(v, t)),
        (Value::Record(fs), Type::Record(ts)) => {
            ts.iter().all(|(l, t)| fs.iter().any(|(m, v)| m == l && conforms(v, t)))
        }
        (Value::Inl(v), Type::Sum(a, _)) => conforms(v, a),
        (Value::Inr(v), Type::Sum(_, b)) => conforms(v, b),
        (Value::Variant(l, v), Type::Variant(ts)) => ts.iter().any(|(m, t)| m == l && conforms(v, t)),
        (Value::List(items), Type::List(t)) => items.iter().all(|v| conforms(v, t)),
        (Value::Folded(_, v), Type::Mu(..)) => unroll(t).is_some_and(|u| conforms(v, &u)),
        _ => false,
    }
}
