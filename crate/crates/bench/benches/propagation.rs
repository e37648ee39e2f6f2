use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relprop_bench::{fan_in, forward_chain, random_scenario, Shape};
use relprop_core::{
    chain_combine, chain_decompose, parse_scenario, run_scenario, DimensionedReliability,
    PropagationConfig, Reliability, RunConfig, Simulator,
};

fn parts(len: usize, rng: &mut ChaCha8Rng) -> Vec<DimensionedReliability> {
    (0..len)
        .map(|_| {
            DimensionedReliability::from_entries(["a", "b", "c"].map(|d| {
                (d, Reliability::new(rng.random_range(-1.0..=1.0)).unwrap())
            }))
        })
        .collect()
}

fn chain_ops(c: &mut Criterion) {
    let cfg = PropagationConfig {
        alpha: 0.9,
        ..Default::default()
    };
    let mut group = c.benchmark_group("chain");
    for len in [2, 8, 64] {
        let parts = parts(len, &mut ChaCha8Rng::seed_from_u64(len as u64));
        let old = chain_combine(&parts, &cfg).unwrap();
        let new = DimensionedReliability::scalar(Reliability::new(0.45).unwrap());
        group.bench_with_input(BenchmarkId::new("combine", len), &parts, |b, p| {
            b.iter(|| chain_combine(black_box(p), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decompose", len), &parts, |b, p| {
            b.iter(|| chain_decompose(black_box(p), &old, &new, &cfg).unwrap())
        });
    }
    group.finish();
}

fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    for len in [4, 32] {
        let events = forward_chain(len);
        group.bench_with_input(BenchmarkId::new("forward_chain", len), &events, |b, e| {
            b.iter(|| run_scenario(e, RunConfig::default()).unwrap())
        });
    }
    for n in [8, 64] {
        let events = fan_in(n);
        group.bench_with_input(BenchmarkId::new("fan_in", n), &events, |b, e| {
            b.iter(|| run_scenario(e, RunConfig::default()).unwrap())
        });
    }
    let shape = Shape {
        agents: 6,
        events: 50,
        dimensioned: true,
    };
    let events = random_scenario(&mut ChaCha8Rng::seed_from_u64(1), shape);
    group.bench_function("random_50", |b| {
        b.iter(|| {
            let mut sim = Simulator::new(RunConfig::default()).unwrap();
            for e in &events {
                let _ = sim.run_event(e);
            }
            sim.trace().len()
        })
    });
    group.finish();
}

fn parser(c: &mut Criterion) {
    let text: String = fan_in(200).iter().map(|e| format!("{e}\n")).collect();
    c.bench_function("parse_fan_in_200", |b| {
        b.iter(|| parse_scenario(black_box(&text)).unwrap())
    });
}

criterion_group!(benches, chain_ops, engine, parser);
criterion_main!(benches);
