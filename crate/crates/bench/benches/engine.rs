use std::hint::black_box;

use alpprolog::pi::{prime_closure, update};
use alpprolog::{Config, Interpreter, Literal, Term, Variant, WumpusEnv};
use alpprolog_bench::{random_cnf, wumpus_case};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("prime_closure");
    for atoms in [8, 12, 16] {
        let cnf = random_cnf(atoms as u64, atoms, atoms as usize, 4);
        group.bench_with_input(BenchmarkId::from_parameter(atoms), &cnf, |b, cnf| {
            b.iter(|| prime_closure(black_box(cnf.iter().cloned())))
        });
    }
    group.finish();
}

fn progression(c: &mut Criterion) {
    // A prime state of realistic size: the 16x16 ground3 initial state.
    let case = wumpus_case(16, Variant::Ground3, 1);
    let state = case.domain.initial_state.clone();
    let at =
        |x: i64, y: i64| Term::app("at", vec![Term::atom("agent"), Term::app("c", vec![Term::Int(x), Term::Int(y)])]);
    let effects = vec![Literal::pos(at(2, 1)), Literal::neg(at(1, 1))];
    c.bench_function("update/16x16_ground3", |b| b.iter(|| update(black_box(&state), &effects)));
}

fn agent(c: &mut Criterion) {
    let mut group = c.benchmark_group("wumpus_agent");
    group.sample_size(10);
    for (size, variant) in [(8, Variant::Ground2), (8, Variant::Ground3), (16, Variant::Ground2)] {
        let case = wumpus_case(size, variant, 1);
        let interp = Interpreter::new(&case.domain, &case.program, Config::default());
        group.bench_function(BenchmarkId::new(variant.to_string(), size), |b| {
            b.iter(|| interp.solve(&case.query, &mut WumpusEnv::new(case.world.clone())))
        });
    }
    group.finish();
}

criterion_group!(benches, closure, progression, agent);
criterion_main!(benches);
