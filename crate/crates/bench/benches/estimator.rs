//! Stage-level and end-to-end throughput of the estimator.
//!
//! Run with `cargo bench -p cardest-bench`. Instances are seeded, so numbers
//! are comparable across runs and machines (up to hardware).

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cardest_bench::{data_graph, live_query};
use cardest_core::cs::refine::{refine_candidate_space, RefineConfig};
use cardest_core::oracle::{exact_count, OracleConfig};
use cardest_core::tree::{
    candidate_tree_sampling, choose_spanning_tree, count_candidate_trees, StoppingConfig,
};
use cardest_core::{build_cycle_index, build_initial_cs, estimate, EstimatorConfig};

fn caps() -> (u64, u64) {
    let d = EstimatorConfig::default();
    (d.triangle_cap, d.four_cycle_cap)
}

fn bench_cycle_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("cycle_index");
    for n in [500usize, 2000] {
        let g = data_graph(n, 1);
        let (tri, quad) = caps();
        group.bench_with_input(BenchmarkId::new("build", n), &g, |b, g| {
            b.iter(|| build_cycle_index(black_box(g), tri, quad))
        });
    }
    group.finish();
}

fn bench_candidate_space(c: &mut Criterion) {
    let mut group = c.benchmark_group("candidate_space");
    for n in [500usize, 2000] {
        let g = data_graph(n, 1);
        let q = live_query(&g, 2);
        let (tri, quad) = caps();
        let cycles_q = build_cycle_index(&q, tri, quad);
        let cycles_g = build_cycle_index(&g, tri, quad);
        group.bench_function(BenchmarkId::new("build_refine", n), |b| {
            b.iter(|| {
                let mut cs = build_initial_cs(black_box(&q), black_box(&g)).unwrap();
                refine_candidate_space(&mut cs, &q, &cycles_q, &cycles_g, &RefineConfig::default())
                    .map(|stats| stats.removed_candidates)
                    .unwrap_or(0)
            })
        });
    }
    group.finish();
}

fn bench_tree_sampling(c: &mut Criterion) {
    let g = data_graph(2000, 1);
    let q = live_query(&g, 2);
    let (tri, quad) = caps();
    let cycles_q = build_cycle_index(&q, tri, quad);
    let cycles_g = build_cycle_index(&g, tri, quad);
    let mut cs = build_initial_cs(&q, &g).unwrap();
    refine_candidate_space(&mut cs, &q, &cycles_q, &cycles_g, &RefineConfig::default()).unwrap();
    let tree = choose_spanning_tree(&cs).unwrap();
    let table = count_candidate_trees::<f64>(&cs, &tree);
    let stopping = StoppingConfig::default();

    c.bench_function("tree_sampling/adaptive_loop", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(9),
            |mut rng| candidate_tree_sampling(&cs, &tree, &table, &stopping, &mut rng),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    for n in [500usize, 2000] {
        let g = data_graph(n, 1);
        let q = live_query(&g, 2);
        let config = EstimatorConfig::default();
        let cycles = build_cycle_index(&g, config.triangle_cap, config.four_cycle_cap);
        group.bench_function(BenchmarkId::new("estimate", n), |b| {
            b.iter(|| estimate(black_box(&q), black_box(&g), &cycles, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let g = data_graph(64, 5);
    let q = live_query(&g, 6);
    c.bench_function("oracle/exact_count/n64", |b| {
        b.iter(|| exact_count(black_box(&q), black_box(&g), &OracleConfig::default()))
    });
}

criterion_group!(
    benches,
    bench_cycle_index,
    bench_candidate_space,
    bench_tree_sampling,
    bench_pipeline,
    bench_oracle
);
criterion_main!(benches);
