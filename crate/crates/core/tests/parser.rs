use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stella_core::parser::tokenize;
use stella_core::syntax::{print_expr, print_type, registry_lookup, resolve_alias, AliasMap, Decl, ExprKind, Lookup};
use stella_core::testing::random_type;
use stella_core::{parse_expr, parse_program, parse_type, pretty_print, ErrorTag, Extension, Type};

const FIG1: &str = "// sample program in Stella Core
language core;

fn increment_twice(n : Nat) -> Nat {
  return succ(succ(n))
}

fn main(n : Nat) -> Nat {
  return increment_twice(succ(n))
}
";

const FIG2: &str = "language core;

extend with #exceptions, #exception-type-declaration;

exception type = Nat

fn fail(n : Nat) -> Bool {
  return throw(succ(0))
}

fn main(n : Nat) -> Bool {
  return try { fail(n) } with { false }
}
";

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![corpus_dir()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "stella") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn registry_knows_paper_extensions() {
    assert_eq!(registry_lookup("#structural-subtyping"), Lookup::Known(Extension::StructuralSubtyping));
    assert_eq!(registry_lookup("#pairs"), Lookup::Known(Extension::Pairs));
    assert_eq!(registry_lookup("#flying-cars"), Lookup::Unknown);
}

#[test]
fn tokenizer_skips_comments() {
    let texts: Vec<String> = tokenize("// hi\nlanguage core;").unwrap().into_iter().map(|t| t.text).collect();
    assert_eq!(texts, ["language", "core", ";"]);
    let texts: Vec<String> = tokenize("succ(0)").unwrap().into_iter().map(|t| t.text).collect();
    assert_eq!(texts, ["succ", "(", "0", ")"]);
}

#[test]
fn illegal_character_is_reported_at_its_position() {
    let err = tokenize("fn main §").unwrap_err();
    assert_eq!((err.span.line(), err.span.col()), (1, 9));
}

#[test]
fn figure_one_parses() {
    let p = parse_program(FIG1).unwrap();
    assert_eq!(p.functions().count(), 2);
    assert!(p.extensions.is_empty());
    assert!(pretty_print(&p).starts_with("language core;\n"));
}

#[test]
fn figure_two_parses() {
    let p = parse_program(FIG2).unwrap();
    let names: Vec<&str> = p.extensions.iter().map(|e| e.as_str()).collect();
    assert_eq!(names, ["#exceptions", "#exception-type-declaration"]);
    assert!(p.decls.iter().any(|d| matches!(d, Decl::ExceptionType { ty: Type::Nat, .. })));
    assert_eq!(p.functions().count(), 2);
    assert!(pretty_print(&p).contains("extend with #exceptions, #exception-type-declaration;"));
}

#[test]
fn language_line_is_mandatory() {
    assert!(parse_program("fn main(n : Nat) -> Nat { return n }").is_err());
}

#[test]
fn expression_forms() {
    let e = parse_expr("succ(succ(n))").unwrap();
    let ExprKind::Succ(inner) = &e.kind else { panic!("{e:?}") };
    let ExprKind::Succ(var) = &inner.kind else { panic!("{inner:?}") };
    assert_eq!(var.kind, ExprKind::Var("n".into()));

    let e = parse_expr("<| value = n |>").unwrap();
    assert!(matches!(&e.kind, ExprKind::VariantInj(l, v) if l == "value" && v.kind == ExprKind::Var("n".into())));

    let e = parse_expr("x cast as Top").unwrap();
    assert!(matches!(&e.kind, ExprKind::CastAs(v, Type::Top) if v.kind == ExprKind::Var("x".into())));
}

#[test]
fn alias_resolution() {
    let mut aliases = AliasMap::new();
    aliases.insert("MyNat".into(), Type::Nat);
    aliases.insert("A".into(), Type::Nat);
    assert_eq!(resolve_alias(&Type::Alias("MyNat".into()), &aliases).unwrap(), Type::Nat);
    assert_eq!(
        resolve_alias(&Type::func(vec![Type::Alias("A".into())], Type::Bool), &aliases).unwrap(),
        Type::func(vec![Type::Nat], Type::Bool)
    );
    let mut cyclic = AliasMap::new();
    cyclic.insert("A".into(), Type::Alias("A".into()));
    assert_eq!(resolve_alias(&Type::Alias("A".into()), &cyclic).unwrap_err().tag, ErrorTag::ERROR_CYCLIC_TYPE_ALIAS);
    assert_eq!(
        resolve_alias(&Type::Alias("B".into()), &aliases).unwrap_err().tag,
        ErrorTag::ERROR_UNDEFINED_TYPE_ALIAS
    );
}

#[test]
fn corpus_round_trips_through_the_printer() {
    let files = corpus_files();
    assert!(files.len() > 80, "corpus looks incomplete: {} files", files.len());
    for path in files {
        let source = fs::read_to_string(&path).unwrap();
        let Ok(p) = parse_program(&source) else { continue };
        let printed = pretty_print(&p);
        let reparsed = parse_program(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()));
        assert_eq!(reparsed, p, "{}", path.display());
        // printing is a fixpoint after one round
        assert_eq!(pretty_print(&reparsed), printed);
    }
}

#[test]
fn expressions_survive_printing() {
    for src in [
        "fn(x : Nat) { return if Nat::iszero(x) then {x, true} else {0, false} }",
        "let {a, b} = {1, 2} in a; b",
        "r := succ(*r); *r",
        "try { throw(<| e = 0 |>) } catch { <| e = n |> => n }",
        "fold[µ L. Unit + {Nat, L}] inl(unit)",
        "const[Nat](x)[Bool](false)",
        "match xs { [] => 0 | cons(h, t) => h }",
        "(n as Top) cast as Nat",
    ] {
        let e = parse_expr(src).unwrap();
        assert_eq!(parse_expr(&print_expr(&e)).unwrap(), e, "{src}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn types_survive_printing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_type(&mut rng, 4);
        let printed = print_type(&t);
        prop_assert_eq!(parse_type(&printed).unwrap(), t, "{}", printed);
    }
}
