//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stella_cli::{check_file, discover, run_corpus, run_program, Expectation, Flags, Status};
use stella_core::matching::is_exhaustive;
use stella_core::poly::{alpha_eq, free_type_vars, substitute};
use stella_core::reconstruct::{annotate, apply_substitution, unify};
use stella_core::subtype::subtype;
use stella_core::testing::{
    alpha_rename, covers_all_values, enumerate_values, random_finite_type, random_occurs_system, random_open_type,
    random_simple_pattern, random_solvable_system, random_subtype, random_type, value_rechecks,
};
use stella_core::{
    eval_program, parse_program, parse_type, pretty_print, typecheck_program, ErrorTag, Options, Outcome, Value,
};

type Verdict = Result<String, String>;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn listing(name: &str) -> PathBuf {
    corpus().join("well-typed").join(name)
}

const LISTINGS: [&str; 7] = [
    "increment_twice.stella",
    "exceptions_fixed_type.stella",
    "subtyping_records.stella",
    "subtyping_variants.stella",
    "generic_id.stella",
    "generic_const.stella",
    "self_application.stella",
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn paper_listings() -> Verdict {
    let start = Instant::now();
    for name in LISTINGS {
        check_file(&listing(name), &Flags::default()).map_err(|r| format!("{name}: {}", r.diagnostic_line()))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("7/7 listings typecheck in {elapsed:?}"))
}

fn run_semantics() -> Verdict {
    let cases: [(&str, fn(u64) -> String); 4] = [
        ("increment_twice.stella", |n| (n + 3).to_string()),
        ("exceptions_fixed_type.stella", |_| "false".to_string()),
        ("generic_id.stella", |n| n.to_string()),
        ("generic_const.stella", |n| n.to_string()),
    ];
    let mut runs = 0;
    for (name, expected) in cases {
        let path = listing(name);
        let checked = check_file(&path, &Flags::default()).map_err(|r| r.diagnostic_line())?;
        for n in 0..=5u64 {
            let run = run_program(&checked.program, &n.to_string(), &path, stella_cli::DEFAULT_FUEL)
                .map_err(|r| r.diagnostic_line())?;
            ensure(run.status == Status::Ok && run.output == expected(n), || {
                format!("{name} on {n}: got {}, expected {}", run.output, expected(n))
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs match exactly"))
}

fn subtyping_ground_truth() -> Verdict {
    let ty = |s: &str| parse_type(s).unwrap();
    ensure(subtype(&ty("{x : Nat, y : Nat}"), &ty("{x : Nat}")), || "record width".into())?;
    ensure(subtype(&ty("<| value : Nat |>"), &ty("<| value : Nat, failure : Unit |>")), || "variant width".into())?;
    let mut flips = Vec::new();
    for name in ["subtyping_records.stella", "subtyping_variants.stella"] {
        let src = fs::read_to_string(listing(name)).unwrap();
        let opts = Options::default();
        ensure(typecheck_program(&parse_program(&src).unwrap(), &opts).is_ok(), || format!("{name} rejected"))?;
        let stripped = src.replace(", #structural-subtyping", "");
        ensure(stripped != src, || format!("{name}: pragma not found"))?;
        match typecheck_program(&parse_program(&stripped).unwrap(), &opts) {
            Ok(_) => return Err(format!("{name} still accepted without subtyping")),
            Err(d) => flips.push(d.tag.to_string()),
        }
    }
    ensure(flips[0] == ErrorTag::ERROR_UNEXPECTED_RECORD_FIELDS.as_str(), || format!("records flip gave {}", flips[0]))?;
    Ok(format!("both relations hold; without the pragma: {}", flips.join(", ")))
}

fn depth(t: &stella_core::Type) -> usize {
    1 + t.children().into_iter().map(depth).max().unwrap_or(0)
}

fn property_suites() -> Verdict {
    let start = Instant::now();
    let rng = |seed: u64| ChaCha8Rng::seed_from_u64(seed);

    // (a) reflexivity and transitivity
    for seed in 0..1000 {
        let t = random_type(&mut rng(seed), 4);
        ensure(depth(&t) <= 5 && subtype(&t, &t), || format!("(a) reflexivity fails on {t:?}"))?;
    }
    for seed in 0..1000 {
        let mut r = rng(10_000 + seed);
        let a = random_type(&mut r, 4);
        let b = random_subtype(&mut r, &a, 2);
        let c = random_subtype(&mut r, &b, 2);
        ensure(subtype(&b, &a) && subtype(&c, &b), || format!("(a) chain link rejected: {c:?} <: {b:?} <: {a:?}"))?;
        ensure(subtype(&c, &a), || format!("(a) transitivity fails: {c:?} <: {a:?}"))?;
    }

    // (b) exhaustiveness against enumeration
    let mut compared = 0;
    for seed in 0..3000 {
        let mut r = rng(20_000 + seed);
        let t = random_finite_type(&mut r, 3);
        if enumerate_values(&t, 64).is_none() {
            continue;
        }
        let n = r.gen_range(1..=4);
        let ps: Vec<_> = (0..n).map(|_| random_simple_pattern(&mut r, &t)).collect();
        let refs: Vec<_> = ps.iter().collect();
        let oracle = covers_all_values(&t, &refs, 64).unwrap();
        ensure(is_exhaustive(&t, &refs) == oracle, || format!("(b) disagreement on {t:?} with {ps:?}"))?;
        compared += 1;
    }

    // (c) unification
    for seed in 0..1000 {
        let system = random_solvable_system(&mut rng(30_000 + seed));
        let s = unify(&system).map_err(|d| format!("(c) unsolved {system:?}: {}", d.message))?;
        for c in &system {
            ensure(apply_substitution(&c.left, &s) == apply_substitution(&c.right, &s), || {
                format!("(c) constraint not equalized: {c:?}")
            })?;
        }
    }
    for seed in 0..1000 {
        let system = random_occurs_system(&mut rng(40_000 + seed));
        match unify(&system) {
            Err(d) if d.tag == ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE => {}
            other => return Err(format!("(c) occurs violation not rejected: {system:?} gave {other:?}")),
        }
    }

    // (d) capture avoidance
    for seed in 0..500 {
        let mut r = rng(50_000 + seed);
        let t = random_open_type(&mut r, 4, &["X", "Y"]);
        let s = random_open_type(&mut r, 2, &["X", "Y", "Z"]);
        let sigma: BTreeMap<String, stella_core::Type> = [("X".to_string(), s.clone())].into();
        let result = substitute(&t, &sigma);
        let fv_t = free_type_vars(&t);
        let mut expected: BTreeSet<String> = fv_t.iter().filter(|v| *v != "X").cloned().collect();
        if fv_t.contains("X") {
            expected.extend(free_type_vars(&s));
        }
        ensure(free_type_vars(&result) == expected, || format!("(d) free variables of {t:?}[X := {s:?}]"))?;
        ensure(alpha_eq(&substitute(&alpha_rename(&t), &sigma), &result), || format!("(d) alpha-instability on {t:?}"))?;
    }

    // (e) parse/pretty round trip over the corpus
    let mut round_trips = 0;
    for case in discover(&corpus()).map_err(|e| e.to_string())? {
        let src = fs::read_to_string(&case.path).unwrap();
        let Ok(p) = parse_program(&src) else { continue };
        let reparsed = parse_program(&pretty_print(&p)).map_err(|e| format!("(e) {}: {e}", case.path.display()))?;
        ensure(reparsed == p, || format!("(e) {} changed", case.path.display()))?;
        round_trips += 1;
    }

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "2000 subtyping, {compared} exhaustiveness, 2000 unification, 500 substitution, {round_trips} round-trip cases in {elapsed:?}"
    ))
}

fn soundness_smoke() -> Verdict {
    let mut evaluated = 0;
    for case in discover(&corpus()).map_err(|e| e.to_string())? {
        if matches!(case.expectation, Expectation::IllTyped { .. }) {
            continue;
        }
        let src = fs::read_to_string(&case.path).unwrap();
        let p = parse_program(&src).map_err(|e| e.to_string())?;
        let checked = typecheck_program(&p, &Options::default()).map_err(|d| d.message)?;
        let p = match &checked.solution {
            Some(s) => annotate(&p, s),
            None => p,
        };
        let ret = p.main().unwrap().ret.clone();
        for n in 0..=3 {
            match eval_program(&p, Value::nat(n)) {
                Outcome::Normal(v) => {
                    value_rechecks(&p, &v, &ret).map_err(|e| format!("{} on {n}: {e}", case.path.display()))?;
                    evaluated += 1;
                }
                // abnormal ends are not values; the corpus marks them with expectations
                Outcome::Panicked | Outcome::Thrown(_) if matches!(case.expectation, Expectation::Run(_)) => {}
                other => return Err(format!("{} on {n}: {other}", case.path.display())),
            }
        }
    }
    Ok(format!("{evaluated} results re-check against main's return type"))
}

fn negative_corpus() -> Verdict {
    let cases: Vec<_> = discover(&corpus())
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|c| matches!(c.expectation, Expectation::IllTyped { .. }))
        .collect();
    let tags: BTreeSet<ErrorTag> = cases
        .iter()
        .map(|c| match &c.expectation {
            Expectation::IllTyped { tag, .. } => *tag,
            _ => unreachable!(),
        })
        .collect();
    ensure(cases.len() >= 30, || format!("only {} ill-typed programs", cases.len()))?;
    ensure(tags.len() >= 15, || format!("only {} distinct tags", tags.len()))?;
    for required in [
        ErrorTag::ERROR_MISSING_MAIN,
        ErrorTag::ERROR_UNDEFINED_VARIABLE,
        ErrorTag::ERROR_NONEXHAUSTIVE_MATCH_PATTERNS,
        ErrorTag::ERROR_OCCURS_CHECK_INFINITE_TYPE,
        ErrorTag::ERROR_UNEXPECTED_SUBTYPE,
        ErrorTag::ERROR_NOT_A_GENERIC_FUNCTION,
    ] {
        ensure(tags.contains(&required), || format!("no case for {required}"))?;
    }
    let (results, summary) = run_corpus(&cases, &Flags::default());
    if let Some(bad) = results.iter().find(|r| !r.passed) {
        return Err(format!("{}: {}", bad.path.display(), bad.detail));
    }
    Ok(format!("{} programs over {} tags, {summary}", cases.len(), tags.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 6] = [
        ("paper-listing conformance", paper_listings),
        ("run semantics", run_semantics),
        ("subtyping ground truth", subtyping_ground_truth),
        ("property suites", property_suites),
        ("soundness smoke", soundness_smoke),
        ("negative corpus", negative_corpus),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
