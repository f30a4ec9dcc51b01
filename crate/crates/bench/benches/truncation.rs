use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slackcrn::*;

const LOTKA_VOLTERRA: &str = "A -> 0 @ 0.6\nB -> 0 @ 0.1\n0 -> B @ 0.1\n0 -> A @ 0.2\nA -> 2A @ 0.2\nA + B -> 2B @ 0.2";

fn lv_chain(n: i64) -> (SlackNetwork, Generator) {
    let net = parse_network(LOTKA_VOLTERRA).unwrap();
    let spec = ConservationSpec::single(vec![1, 1], n).with_mode(SlackMode::Optimized);
    let snet = build_slack(&net, &spec, Some(&[3, 3])).unwrap();
    let space = Arc::new(enumerate_states(&snet).unwrap());
    let gen = build_generator(space, &snet).unwrap();
    (snet, gen)
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_generator");
    for n in [40i64, 160] {
        let (snet, _) = lv_chain(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &snet, |b, snet| {
            b.iter(|| {
                let space = Arc::new(enumerate_states(snet).unwrap());
                black_box(build_generator(space, snet).unwrap())
            })
        });
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("mfpt");
    group.sample_size(10);
    for n in [40i64, 80] {
        let (_, gen) = lv_chain(n);
        let from = gen.space().require(&[3, 3]).unwrap();
        let k = gen.space().select(|x| x[0] == 0 || x[1] == 0);
        for method in [LinearMethod::Gth, LinearMethod::Lu] {
            group.bench_with_input(BenchmarkId::new(format!("{method:?}"), n), &gen, |b, gen| {
                b.iter(|| black_box(mfpt(gen, from, &k, method).unwrap()))
            });
        }
    }
    group.finish();

    let (_, gen) = lv_chain(40);
    let p0 = Distribution::point(gen.space().clone(), gen.space().require(&[3, 3]).unwrap());
    c.bench_function("transient/40", |b| b.iter(|| black_box(transient(&gen, &p0.p, &[1.0, 5.0], None).unwrap())));
}

fn simulate_batch(c: &mut Criterion) {
    let net = parse_network(LOTKA_VOLTERRA).unwrap();
    c.bench_function("ssa/mfpt_1000", |b| {
        b.iter(|| black_box(estimate_mfpt(&net, &[3, 3], |x| x[0] == 0 || x[1] == 0, 1000, 1, None).unwrap()))
    });
}

criterion_group!(benches, build, solve, simulate_batch);
criterion_main!(benches);
