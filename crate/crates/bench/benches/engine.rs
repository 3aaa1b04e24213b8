use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wowsim::generators::{gen_pattern, Pattern, PatternSpec};
use wowsim::scheduler::ilp::{solve_assignment, IlpLimits, IlpNode, IlpTask};
use wowsim::sim::{recompute_rates, Usage};
use wowsim::{SimConfig, StrategyKind, TaskId};

fn ilp_instance(tasks: usize, nodes: usize, seed: u64) -> (Vec<IlpTask>, Vec<IlpNode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = (0..nodes)
        .map(|_| IlpNode {
            cpu_free: rng.random_range(2..=16),
            mem_free: rng.random_range(4..=64) << 30,
        })
        .collect();
    let ts = (0..tasks)
        .map(|k| IlpTask {
            id: TaskId(k as u32),
            weight: rng.random_range(2.0..10.0),
            cpus: rng.random_range(1..=4),
            mem: rng.random_range(1..=8) << 30,
            allowed: (0..nodes).filter(|_| rng.random_bool(0.5)).collect(),
        })
        .collect();
    (ts, ns)
}

fn bench_ilp(c: &mut Criterion) {
    let mut g = c.benchmark_group("ilp");
    for (tasks, nodes) in [(8, 4), (16, 8), (32, 8)] {
        let (ts, ns) = ilp_instance(tasks, nodes, 7);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{tasks}x{nodes}")), &(ts, ns), |b, (ts, ns)| {
            b.iter(|| solve_assignment(black_box(ts), black_box(ns), IlpLimits::default()))
        });
    }
    g.finish();
}

fn bench_rates(c: &mut Criterion) {
    let mut g = c.benchmark_group("recompute_rates");
    for flows in [16, 128, 1024] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let resources = 3 * 8 + 2;
        let caps: Vec<f64> = (0..resources).map(|r| if r % 3 == 2 { 1.0 } else { 125e6 }).collect();
        let usages: Vec<Vec<Usage>> = (0..flows)
            .map(|_| {
                let a = rng.random_range(0..8);
                let b = rng.random_range(0..8);
                vec![
                    Usage { resource: 3 * a, coef: 1.0 },
                    Usage { resource: 3 * b + 1, coef: 1.0 },
                    Usage { resource: 3 * b + 2, coef: 1.0 / 402e6 },
                ]
            })
            .collect();
        let refs: Vec<&[Usage]> = usages.iter().map(Vec::as_slice).collect();
        g.bench_with_input(BenchmarkId::from_parameter(flows), &refs, |b, refs| {
            b.iter(|| recompute_rates(black_box(refs), black_box(&caps)))
        });
    }
    g.finish();
}

fn bench_sim(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(20);
    for p in [Pattern::Chain, Pattern::GroupMultiple] {
        let graph = gen_pattern(&PatternSpec::new(p, 100)).unwrap();
        for s in [StrategyKind::Orig, StrategyKind::Wow] {
            let cfg = SimConfig {
                strategy: s,
                ..SimConfig::default()
            };
            g.bench_function(format!("{p}/{s}"), |b| b.iter(|| wowsim::run(&cfg, &graph).unwrap()));
        }
    }
    g.finish();
}

criterion_group!(benches, bench_ilp, bench_rates, bench_sim);
criterion_main!(benches);
