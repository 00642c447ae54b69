//! Randomized checks of the type-level algorithms against independent
//! oracles. Each property draws a seed and builds its inputs with a seeded
//! ChaCha generator, so a failing case is reproducible from the seed alone.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stella_core::poly::{alpha_eq, free_type_vars, substitute};
use stella_core::reconstruct::{apply_substitution, unify};
use stella_core::subtype::subtype;
use stella_core::matching::is_exhaustive;
use stella_core::testing::{
    alpha_rename, covers_all_values, enumerate_values, random_finite_type, random_occurs_system, random_open_type,
    random_simple_pattern, random_solvable_system, random_subtype, random_supertype, random_type,
};
use stella_core::{ErrorTag, Type};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn depth(t: &Type) -> usize {
    1 + t.children().into_iter().map(depth).max().unwrap_or(0)
}

/// Substitution that does not bother avoiding capture. Correct only when
/// no binder in `t` is free in the replacement.
fn naive_substitute(t: &Type, x: &str, s: &Type) -> Type {
    let go = |u: &Type| naive_substitute(u, x, s);
    match t {
        Type::Var(y) if y == x => s.clone(),
        Type::Forall(bs, _) if bs.iter().any(|b| b == x) => t.clone(),
        Type::Mu(b, _) if b == x => t.clone(),
        Type::Forall(bs, body) => Type::Forall(bs.clone(), Box::new(go(body))),
        Type::Mu(b, body) => Type::Mu(b.clone(), Box::new(go(body))),
        Type::Fn(ps, r) => Type::Fn(ps.iter().map(go).collect(), Box::new(go(r))),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(go).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, u)| (l.clone(), go(u))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, u)| (l.clone(), go(u))).collect()),
        Type::Sum(a, b) => Type::sum(go(a), go(b)),
        Type::List(a) => Type::list(go(a)),
        Type::Ref(a) => Type::reference(go(a)),
        _ => t.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn subtyping_is_reflexive(seed in any::<u64>()) {
        let t = random_type(&mut rng(seed), 4);
        prop_assert!(depth(&t) <= 5);
        prop_assert!(subtype(&t, &t), "{t:?}");
    }

    #[test]
    fn subtyping_is_transitive_along_chains(seed in any::<u64>()) {
        let mut r = rng(seed);
        let top = random_type(&mut r, 4);
        let middle = random_subtype(&mut r, &top, 2);
        let bottom = random_subtype(&mut r, &middle, 2);
        // the generators apply the rules backwards, so each link must hold
        prop_assert!(subtype(&middle, &top), "{middle:?} <: {top:?}");
        prop_assert!(subtype(&bottom, &middle), "{bottom:?} <: {middle:?}");
        prop_assert!(subtype(&bottom, &top), "{bottom:?} <: {top:?}");
        // and going up from the bottom as well
        let above = random_supertype(&mut r, &top, 2);
        prop_assert!(subtype(&top, &above) && subtype(&bottom, &above));
    }

    #[test]
    fn exhaustiveness_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_finite_type(&mut r, 3);
        let Some(values) = enumerate_values(&t, 64) else { return Ok(()) };
        prop_assert!(values.len() <= 64);
        let n = r.gen_range(1..=4);
        let patterns: Vec<_> = (0..n).map(|_| random_simple_pattern(&mut r, &t)).collect();
        let refs: Vec<_> = patterns.iter().collect();
        let oracle = covers_all_values(&t, &refs, 64).expect("enumerable");
        prop_assert_eq!(is_exhaustive(&t, &refs), oracle, "{:?} with {:?}", t, patterns);
    }

    #[test]
    fn unification_solves_generated_systems(seed in any::<u64>()) {
        let system = random_solvable_system(&mut rng(seed));
        let s = unify(&system).map_err(|d| TestCaseError::fail(format!("{d:?} for {system:?}")))?;
        for c in &system {
            let l = apply_substitution(&c.left, &s);
            let r = apply_substitution(&c.right, &s);
            prop_assert_eq!(&l, &r);
            // solutions are idempotent
            prop_assert_eq!(apply_substitution(&l, &s), l);
        }
    }

    #[test]
    fn occurs_violations_are_rejected(seed in any::<u64>()) {
        let system = random_occurs_system(&mut rng(seed));
        let err = unify(&system).expect_err("infinite type accepted");
        prop_assert_eq!(err.tag, ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn substitution_avoids_capture(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_open_type(&mut r, 4, &["X", "Y"]);
        let s = random_open_type(&mut r, 2, &["X", "Y", "Z"]);
        let sigma: BTreeMap<String, Type> = [("X".to_string(), s.clone())].into();
        let result = substitute(&t, &sigma);

        // FV(t[X := s]) = FV(t) \ {X} ∪ (FV(s) if X ∈ FV(t))
        let fv_t = free_type_vars(&t);
        let mut expected: BTreeSet<String> = fv_t.iter().filter(|v| *v != "X").cloned().collect();
        if fv_t.contains("X") {
            expected.extend(free_type_vars(&s));
        }
        prop_assert_eq!(free_type_vars(&result), expected);

        // renaming binders first commutes with substitution
        let renamed = alpha_rename(&t);
        prop_assert!(alpha_eq(&renamed, &t));
        prop_assert!(alpha_eq(&substitute(&renamed, &sigma), &result));

        // after renaming no binder can capture, so naive substitution is an oracle
        prop_assert!(alpha_eq(&naive_substitute(&renamed, "X", &s), &result));
    }
}

/// Guards against generators that only ever produce trivial cases.
#[test]
fn generators_cover_both_verdicts() {
    let (mut exhaustive, mut partial, mut metas) = (0, 0, 0);
    for seed in 0..1000 {
        let mut r = rng(seed);
        let t = random_finite_type(&mut r, 3);
        if enumerate_values(&t, 64).is_some() {
            let n = r.gen_range(1..=4);
            let patterns: Vec<_> = (0..n).map(|_| random_simple_pattern(&mut r, &t)).collect();
            if is_exhaustive(&t, &patterns.iter().collect::<Vec<_>>()) {
                exhaustive += 1;
            } else {
                partial += 1;
            }
        }
        let system = random_solvable_system(&mut rng(seed));
        if system.iter().any(|c| c.left.contains_meta() || c.right.contains_meta()) {
            metas += 1;
        }
    }
    assert!(exhaustive > 100 && partial > 100, "exhaustive {exhaustive}, partial {partial}");
    assert!(metas > 500, "{metas}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn constraint_order_is_irrelevant(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut r = rng(seed);
        let system = random_solvable_system(&mut r);
        let mut shuffled = system.clone();
        shuffled.shuffle(&mut r);
        let a = unify(&system).expect("solvable");
        let b = unify(&shuffled).expect("solvable in any order");
        // most general unifiers agree on every metavariable they ground
        for c in &system {
            prop_assert_eq!(apply_substitution(&c.left, &a), apply_substitution(&c.left, &b));
        }
        let mut bad = system.clone();
        bad.push(stella_core::reconstruct::Constraint::new(Type::Nat, Type::Bool, stella_core::Span::DUMMY));
        bad.shuffle(&mut r);
        prop_assert!(unify(&bad).is_err());
    }
}
