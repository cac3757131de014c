use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pel_bench::{chain_program, fanout_program};
use pel_core::grammar::{self, CapabilityConfig};
use pel_core::scheduler;
use pel_core::{parse_source, Interp};

fn bench_parse(c: &mut Criterion) {
    let src = fanout_program(64);
    c.bench_function("parse 65-form program", |b| {
        b.iter(|| parse_source(black_box(&src)).unwrap())
    });
}

fn bench_pipe_chain(c: &mut Criterion) {
    let src = chain_program(16);
    let interp = Interp::offline();
    c.bench_function("eval 16-stage pipe chain", |b| {
        b.iter(|| interp.eval_source(black_box(&src)).unwrap())
    });
}

fn bench_partial_application(c: &mut Criterion) {
    let interp = Interp::offline();
    interp.eval_source("(def add (lambda [:x :y] (+ x y)))").unwrap();
    c.bench_function("partial application round trip", |b| {
        b.iter(|| interp.eval_source(black_box("((add 5) 10)")).unwrap())
    });
}

fn bench_scheduler(c: &mut Criterion) {
    let src = fanout_program(32);
    let forms = parse_source(&src).unwrap();
    let mut group = c.benchmark_group("33-form fanout");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let interp = Interp::offline();
            interp.eval_source(black_box(&src)).unwrap()
        })
    });
    group.bench_function("concurrent jobs=4", |b| {
        b.iter(|| {
            let interp = Interp { jobs: 4, ..Interp::offline() };
            scheduler::run_exprs_concurrent(&interp, black_box(&forms), &interp.global).unwrap()
        })
    });
    group.finish();
}

fn bench_grammar_sampling(c: &mut Criterion) {
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    let caps = CapabilityConfig::default();
    c.bench_function("sample+validate depth-2 program", |b| {
        let mut rng = StdRng::seed_from_u64(7);
        b.iter(|| {
            let text = grammar::sample_program(&caps, 2, &mut rng);
            let forms = parse_source(&text).unwrap();
            grammar::validate(black_box(&forms), &caps)
        })
    });
}

criterion_group!(
    benches,
    bench_parse,
    bench_pipe_chain,
    bench_partial_application,
    bench_scheduler,
    bench_grammar_sampling
);
criterion_main!(benches);
