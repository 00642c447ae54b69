use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use stella_core::interp::with_large_stack;
use stella_core::reconstruct::annotate;
use stella_core::testing::value_rechecks;
use stella_core::{
    eval_program, eval_program_with_fuel, parse_expr, parse_program, typecheck_program, FuelExhausted, Interpreter,
    Options, Outcome, Program, RuntimeErrorKind, Value,
};

fn corpus(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(sub)
}

fn load(sub: &str, name: &str) -> Program {
    parse_program(&fs::read_to_string(corpus(sub).join(name)).unwrap()).unwrap()
}

fn run(p: &Program, n: u64) -> String {
    eval_program(p, Value::nat(n)).to_string()
}

#[test]
fn figure_one_adds_three() {
    let p = load("well-typed", "increment_twice.stella");
    assert_eq!(eval_program(&p, Value::nat(2)), Outcome::Normal(Value::nat(5)));
    for n in 0..=5 {
        assert_eq!(run(&p, n), (n + 3).to_string());
    }
}

#[test]
fn figure_two_catches_the_throw() {
    let p = load("well-typed", "exceptions_fixed_type.stella");
    assert_eq!(eval_program(&p, Value::nat(0)), Outcome::Normal(Value::Bool(false)));
    for n in 0..=5 {
        assert_eq!(run(&p, n), "false");
    }
}

#[test]
fn generic_figures_return_their_argument() {
    let id = load("well-typed", "generic_id.stella");
    let konst = load("well-typed", "generic_const.stella");
    assert_eq!(eval_program(&id, Value::nat(7)), Outcome::Normal(Value::nat(7)));
    assert_eq!(eval_program(&konst, Value::nat(4)), Outcome::Normal(Value::nat(4)));
    for n in 0..=5 {
        assert_eq!(run(&id, n), n.to_string());
        assert_eq!(run(&konst, n), n.to_string());
    }
}

fn eval_closed(src: &str) -> String {
    let e = parse_expr(src).unwrap();
    let p = parse_program("language core;").unwrap();
    let mut interp = Interpreter::new(&p);
    interp.eval_expr(&e).unwrap().to_string()
}

#[test]
fn expression_outcomes() {
    assert_eq!(eval_closed("*new(succ(0))"), "1");
    assert_eq!(eval_closed("try { panic! } with { 0 }"), "panic!");
    assert_eq!(eval_closed("try { throw(3) } with { 0 }"), "0");
    assert_eq!(eval_closed("try { throw(3) } catch { n => succ(n) }"), "4");
    assert_eq!(eval_closed("throw(<| oops = 2 |>)"), "uncaught exception: <| oops = 2 |>");
    assert_eq!(eval_closed("List::head([])"), "runtime error: head of empty list");
    assert_eq!(eval_closed("List::tail([])"), "runtime error: tail of empty list");
    assert_eq!(eval_closed("(0 as Top) cast as Bool"), "runtime error: cast failure");
    assert_eq!(eval_closed("{a = 1, b = {true, unit}}"), "{a = 1, b = {true, unit}}");
    assert_eq!(eval_closed("cons(1, [2, 3])"), "[1, 2, 3]");
    assert_eq!(eval_closed("fn(x : Nat) { return x }"), "<fun>");
    assert_eq!(eval_closed("new(0)"), "<location 0>");
}

#[test]
fn arguments_are_evaluated_left_to_right() {
    let src = "let r = new(0) in {r := succ(*r); *r, r := succ(succ(*r)); *r}";
    assert_eq!(eval_closed(src), "{1, 3}");
    // an exception in the first argument stops the second
    assert_eq!(eval_closed("let r = new(0) in try { {throw(0), r := 5} } with { *r }"), "0");
}

#[test]
fn naturals_do_not_overflow() {
    let big = "18446744073709551615";
    let v = eval_closed(&format!("succ({big})"));
    assert_eq!(v.parse::<BigUint>().unwrap(), big.parse::<BigUint>().unwrap() + 1u32);
}

#[test]
fn divergence_runs_out_of_fuel() {
    let p = parse_program(
        "language core;\nextend with #general-recursion;\nfn main(n : Nat) -> Nat { return fix(fn(f : fn(Nat) -> Nat) { return fn(k : Nat) { return f(succ(k)) } })(n) }",
    )
    .unwrap();
    let result = with_large_stack(|| eval_program_with_fuel(&p, Value::nat(0), 100_000).map(|o| o.to_string()));
    assert_eq!(result, Err(FuelExhausted));
}

#[test]
fn stores_are_per_evaluation() {
    let p = load("well-typed", "references_counter.stella");
    let mut a = Interpreter::new(&p);
    let mut b = Interpreter::new(&p);
    assert_eq!(a.call_main(Value::nat(1)).unwrap().to_string(), "3");
    assert_eq!(a.store().len(), 1);
    assert!(b.store().is_empty());
    assert_eq!(b.call_main(Value::nat(10)).unwrap().to_string(), "12");
    assert_eq!(a.store()[0], Value::nat(3));
    assert_eq!(b.store()[0], Value::nat(12));
}

#[test]
fn concurrent_evaluations_agree() {
    let p = load("well-typed", "fix_factorial.stella");
    let expected: Vec<String> = (0..6).map(|n| run(&p, n)).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(|| (0..6).map(|n| run(&p, n)).collect::<Vec<_>>())).collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), expected);
        }
    });
}

#[test]
fn types_do_not_affect_results() {
    // the reconstructed program and its annotated form evaluate alike
    let p = load("well-typed", "reconstruction_auto.stella");
    let checked = typecheck_program(&p, &Options::default()).unwrap();
    let annotated = annotate(&p, checked.solution.as_ref().unwrap());
    for n in 0..4 {
        assert_eq!(run(&p, n), run(&annotated, n));
    }
    // instantiating at different types does not change the value
    let a = eval_closed("generic [X] fn(x : X) { return x }[Nat](3)");
    let b = eval_closed("generic [X] fn(x : X) { return x }[Top](3)");
    assert_eq!(a, b);
}

#[test]
fn runtime_errors_are_reported_not_raised() {
    let p = parse_program(
        "language core;\nextend with #lists;\nfn main(n : Nat) -> Nat { return List::head(List::tail([n])) }",
    )
    .unwrap();
    assert_eq!(eval_program(&p, Value::nat(0)), Outcome::RuntimeError(RuntimeErrorKind::HeadOfEmptyList));
}

#[test]
fn well_typed_programs_produce_well_typed_values() {
    let mut checked_any = 0;
    for dir in ["well-typed", "run"] {
        for entry in fs::read_dir(corpus(dir)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_none_or(|x| x != "stella") {
                continue;
            }
            let p = parse_program(&fs::read_to_string(&path).unwrap()).unwrap();
            let checked = typecheck_program(&p, &Options::default()).unwrap();
            let p = match &checked.solution {
                Some(s) => annotate(&p, s),
                None => p,
            };
            let main = p.main().unwrap();
            for n in 0..=3 {
                match eval_program(&p, Value::nat(n)) {
                    Outcome::Normal(v) => {
                        if let Err(e) = value_rechecks(&p, &v, &main.ret) {
                            panic!("{} on {n}: {e}", path.display());
                        }
                        checked_any += 1;
                    }
                    // only these corpus programs end abnormally on purpose
                    other => assert!(
                        path.ends_with("panic.stella") || path.ends_with("uncaught_exception.stella"),
                        "{} on {n}: {other}",
                        path.display()
                    ),
                }
            }
        }
    }
    assert!(checked_any > 100);
}
