use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rigidlab::constructions::{discus_and_hole, random_triangulated_sphere, tight_single_block_instance};
use rigidlab::girth::girth_check_with;
use rigidlab::rigidity::generic_rank_with;
use rigidlab::sparsity::is_36_sparse_with;
use rigidlab::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sparsity(c: &mut Criterion) {
    let g = random_triangulated_sphere(40, 1).unwrap().graph();
    let mut group = c.benchmark_group("sparsity_sphere40");
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| is_36_sparse_with(black_box(&g), exec)));
    }
    group.finish();
}

fn rank(c: &mut Criterion) {
    let g = random_triangulated_sphere(60, 2).unwrap().graph();
    let mut group = c.benchmark_group("rank_sphere60_16_trials");
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| generic_rank_with(black_box(&g), 16, 0, exec)));
    }
    group.finish();
}

fn corpus(c: &mut Criterion) {
    let instances: Vec<_> = (0..24).filter_map(|k| tight_single_block_instance(7, k, 20)).collect();
    let mut group = c.benchmark_group("corpus_girth_and_sparsity");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, instances.len()), &instances, |b, xs| {
            b.iter(|| {
                exec.map(xs, |fg| {
                    let inner = Execution::Sequential;
                    let girth = girth_check_with(fg, inner).passes();
                    let tight = is_36_sparse_with(discus_and_hole(fg).graph(), inner).is_tight();
                    girth == tight
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sparsity, rank, corpus);
criterion_main!(benches);
