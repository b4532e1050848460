use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use popgen_dyn::analysis::{verify_rate_ordering, OrderingConfig};
use popgen_dyn::equilibria::{population_bound, BoundConfig};
use popgen_dyn::integrate::{simulate, SimConfig};
use popgen_dyn::presets::codominant_example;
use popgen_dyn::sampling::{model, random_polymorphic_state, random_valid_rates, rng};
use popgen_dyn::{Execution, ReducedKind};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("population_bound");
    let m = model(ReducedKind::Slow, random_valid_rates(&mut rng(3)));
    for subdivisions in [20, 60] {
        let cfg = BoundConfig {
            subdivisions,
            ..BoundConfig::default()
        };
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, subdivisions), &cfg, |b, cfg| {
                b.iter(|| population_bound(black_box(&m), cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn ordering(c: &mut Criterion) {
    let mut group = c.benchmark_group("rate_ordering");
    let m = codominant_example(ReducedKind::Fast);
    let cfg = OrderingConfig {
        samples: 4000,
        ..OrderingConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| verify_rate_ordering(black_box(&m), &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation_ensemble");
    group.sample_size(10);
    let mut r = rng(9);
    let runs: Vec<_> = (0..32)
        .map(|k| {
            let kind = if k % 2 == 0 {
                ReducedKind::Fast
            } else {
                ReducedKind::Slow
            };
            (
                model(kind, random_valid_rates(&mut r)),
                random_polymorphic_state(&mut r),
            )
        })
        .collect();
    let cfg = SimConfig {
        t_end: 50.0,
        ..SimConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec.map(&runs, |(m, x0)| simulate(m, x0, &cfg).unwrap().terminal().total()))
        });
    }
    group.finish();
}

criterion_group!(benches, bound, ordering, ensemble);
criterion_main!(benches);
