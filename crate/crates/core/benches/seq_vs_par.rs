use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netdyn::graphs::{
    sample_configuration_model, sample_degrees, CmMode, DegreeDistribution, DEFAULT_REJECTION_CAP,
};
use netdyn::models::builtin;
use netdyn::rng::stream;
use netdyn::sim::{mlfe_ensemble, replicate, simulate, MlfeOptions, SimOptions};

fn sir() -> netdyn::models::ModelSpec {
    let mut p = BTreeMap::new();
    p.insert("beta".to_string(), 1.0);
    p.insert("gamma".to_string(), 0.5);
    builtin("sir", &p).unwrap()
}

fn bench_replicas(c: &mut Criterion) {
    let model = sir();
    let theta = DegreeDistribution::delta(3);
    let mut rng = stream(1, 0);
    let degrees = sample_degrees(&theta, 200, &mut rng);
    let graph =
        sample_configuration_model(&degrees, &mut rng, CmMode::Reject, DEFAULT_REJECTION_CAP)
            .unwrap();
    let init: Vec<i32> = (0..graph.n()).map(|v| if v < 20 { 1 } else { 0 }).collect();

    let mut group = c.benchmark_group("replicas_sir_n200_t2");
    for (label, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallel, |b, &par| {
            b.iter(|| {
                replicate(64, 7, par, |_, rng| {
                    simulate(&model, &graph, &init, &SimOptions::new(2.0), rng)
                        .unwrap()
                        .events
                        .len()
                })
            })
        });
    }
    group.finish();
}

fn bench_mlfe(c: &mut Criterion) {
    let model = sir();
    let theta = DegreeDistribution::delta(3);
    let mut group = c.benchmark_group("mlfe_sir_n4000_t1");
    for (label, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallel, |b, &par| {
            b.iter(|| {
                let opts = MlfeOptions {
                    n_copies: 4_000,
                    dt: 1e-2,
                    t_end: 1.0,
                    seed: 11,
                    parallel: par,
                    grid: vec![0.0, 1.0],
                };
                mlfe_ensemble(&model, &theta, &[0.9, 0.1, 0.0], None, &opts).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_replicas, bench_mlfe);
criterion_main!(benches);
