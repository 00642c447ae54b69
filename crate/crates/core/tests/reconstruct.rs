use stella_core::reconstruct::{annotate, apply_substitution, generate_constraints, unify, Constraint, Substitution};
use stella_core::typer::{Context, Typer};
use stella_core::{parse_expr, parse_program, parse_type, typecheck_program, ErrorTag, Extension, Options, Span, Type};

fn infer_recon(vars: &[(&str, Type)], src: &str) -> Result<(Type, Vec<Constraint>), ErrorTag> {
    let mut ctx = Context::with_extensions([Extension::TypeReconstruction]);
    for (n, t) in vars {
        ctx.bind(*n, t.clone());
    }
    let e = parse_expr(src).unwrap();
    let mut typer = Typer::reconstructing(&mut ctx, 100);
    let t = typer.infer(&e).map_err(|d| d.tag)?;
    Ok((t, typer.take_recon().unwrap().constraints))
}

fn eq(l: Type, r: Type) -> Constraint {
    Constraint::new(l, r, Span::DUMMY)
}

#[test]
fn successor_forces_its_argument() {
    let (t, cs) = infer_recon(&[], "fn(x : auto) { return succ(x) }").unwrap();
    let Type::Fn(params, ret) = &t else { panic!("{t:?}") };
    let Type::Meta(m) = params[0] else { panic!("{t:?}") };
    assert_eq!(**ret, Type::Nat);
    assert_eq!(cs.len(), 1);
    let s = unify(&cs).unwrap();
    assert_eq!(s.get(m), Some(&Type::Nat));
    assert_eq!(apply_substitution(&t, &s), Type::func(vec![Type::Nat], Type::Nat));
}

#[test]
fn identity_generates_nothing() {
    let (t, cs) = infer_recon(&[], "fn(x : auto) { return x }").unwrap();
    let Type::Fn(params, ret) = &t else { panic!("{t:?}") };
    assert!(matches!(params[0], Type::Meta(_)));
    assert_eq!(params[0], **ret);
    assert!(cs.is_empty());
}

#[test]
fn branches_share_a_result() {
    let mut ctx = Context::with_extensions([Extension::TypeReconstruction]);
    ctx.bind("x", Type::Bool);
    let result = Type::Meta(1);
    let cs = generate_constraints(&mut ctx, &parse_expr("if x then 0 else false").unwrap(), &result).unwrap();
    let pairs: Vec<(Type, Type)> = cs.iter().map(|c| (c.left.clone(), c.right.clone())).collect();
    let mentions = |t: &Type| pairs.iter().any(|(l, r)| (l == t && *r == result) || (r == t && *l == result));
    assert!(mentions(&Type::Nat) && mentions(&Type::Bool), "{pairs:?}");
    assert!(unify(&cs).is_err());
    // the whole program is rejected too
    let src = "language core;\nextend with #type-reconstruction;\nfn main(x : Bool) -> auto { return if x then 0 else false }";
    let d = typecheck_program(&parse_program(src).unwrap(), &Options::default()).unwrap_err();
    assert_eq!(d.tag, ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION);
}

#[test]
fn unification_examples() {
    let s = unify(&[eq(Type::Meta(1), Type::Nat)]).unwrap();
    assert_eq!(s.iter().collect::<Vec<_>>(), vec![(1, &Type::Nat)]);

    let s = unify(&[eq(
        Type::func(vec![Type::Meta(1)], Type::Bool),
        Type::func(vec![Type::Nat], Type::Meta(2)),
    )])
    .unwrap();
    assert_eq!(s.get(1), Some(&Type::Nat));
    assert_eq!(s.get(2), Some(&Type::Bool));

    let d = unify(&[eq(Type::Meta(1), Type::func(vec![Type::Meta(1)], Type::Nat))]).unwrap_err();
    assert_eq!(d.tag, ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE);

    let d = unify(&[eq(Type::Nat, Type::Bool)]).unwrap_err();
    assert_eq!(d.tag, ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION);
}

#[test]
fn substitution_examples() {
    let mut s = Substitution::new();
    s.insert(1, Type::Nat);
    let f = Type::func(vec![Type::Meta(1)], Type::Meta(1));
    assert_eq!(apply_substitution(&f, &s), Type::func(vec![Type::Nat], Type::Nat));

    let t = parse_type("forall X. fn(X, {Nat, Bool}) -> [X]").unwrap();
    assert_eq!(apply_substitution(&t, &Substitution::new()), t);

    let chain: Substitution = [(1, Type::Meta(2)), (2, Type::Bool)].into_iter().collect();
    let once = apply_substitution(&Type::Meta(1), &chain);
    assert_eq!(once, Type::Bool);
    assert_eq!(apply_substitution(&once, &chain), once);
}

#[test]
fn annotated_programs_recheck_without_holes() {
    let src = "language core;
extend with #type-reconstruction;

fn twice(f : auto) -> auto {
  return fn(x : auto) { return f(f(x)) }
}

fn main(n : auto) -> auto {
  return twice(fn(k : auto) { return succ(k) })(n)
}
";
    let p = parse_program(src).unwrap();
    let checked = typecheck_program(&p, &Options::default()).unwrap();
    let annotated = annotate(&p, checked.solution.as_ref().unwrap());
    let main = annotated.main().unwrap();
    assert_eq!(main.params[0].ty, Type::Nat);
    assert_eq!(main.ret, Type::Nat);
    let twice = annotated.functions().next().unwrap();
    assert_eq!(twice.params[0].ty, parse_type("fn(Nat) -> Nat").unwrap());
    assert!(typecheck_program(&annotated, &Options::default()).unwrap().solution.unwrap().is_empty());
}

#[test]
fn holes_need_the_extension() {
    let src = "language core;\nfn main(n : auto) -> Nat { return n }";
    let d = typecheck_program(&parse_program(src).unwrap(), &Options::default()).unwrap_err();
    assert_eq!(d.tag, ErrorTag::ERROR_EXTENSION_NOT_ENABLED);
    let opts = Options { permissive: true, trace: false };
    assert!(typecheck_program(&parse_program(src).unwrap(), &opts).is_ok());
}
