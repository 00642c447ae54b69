use std::fs;
use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stella_core::reconstruct::unify;
use stella_core::subtype::subtype;
use stella_core::testing::{random_solvable_system, random_subtype, random_type};
use stella_core::{eval_program, parse_program, typecheck_program, Options, Value};

fn corpus_sources() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/well-typed");
    let mut paths: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
}

fn front_end(c: &mut Criterion) {
    let sources = corpus_sources();
    c.bench_function("parse well-typed corpus", |b| {
        b.iter(|| sources.iter().map(|s| parse_program(black_box(s)).unwrap()).count())
    });
    let programs: Vec<_> = sources.iter().map(|s| parse_program(s).unwrap()).collect();
    c.bench_function("typecheck well-typed corpus", |b| {
        b.iter(|| {
            for p in &programs {
                typecheck_program(black_box(p), &Options::default()).unwrap();
            }
        })
    });
}

fn algorithms(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<_> = (0..200)
        .map(|_| {
            let t = random_type(&mut rng, 4);
            (random_subtype(&mut rng, &t, 2), t)
        })
        .collect();
    c.bench_function("subtype 200 random pairs", |b| {
        b.iter(|| pairs.iter().filter(|(s, t)| subtype(black_box(s), black_box(t))).count())
    });
    c.bench_function("unify random system", |b| {
        b.iter_batched(|| random_solvable_system(&mut rng), |sys| unify(&sys).unwrap(), BatchSize::SmallInput)
    });
}

fn evaluation(c: &mut Criterion) {
    let src = "language core;
extend with #general-recursion;

fn main(n : Nat) -> Nat {
  return fix(fn(f : fn(Nat) -> Nat) {
    return fn(k : Nat) { return if Nat::iszero(k) then 0 else succ(succ(f(Nat::pred(k)))) }
  })(n)
}
";
    let p = parse_program(src).unwrap();
    c.bench_function("eval fix doubling of 1000", |b| b.iter(|| eval_program(&p, black_box(Value::nat(1000)))));
}

criterion_group!(benches, front_end, algorithms, evaluation);
criterion_main!(benches);
