//! Parallel vs sequential execution of a multi-seed experiment.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use guidekit_core::bench::runner::{Experiment, ExperimentConfig};

fn seeds(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_seeds");
    group.sample_size(10);
    for (env, strategy) in [("simple_passage", "voronoi"), ("trap", "medialaxis")] {
        for sequential in [false, true] {
            let config = ExperimentConfig { sequential, ..ExperimentConfig::new(env, strategy, 16, 300) };
            let exp = Experiment::prepare(config).expect("experiment");
            let mode = if sequential { "sequential" } else { "parallel" };
            group.bench_with_input(BenchmarkId::new(format!("{strategy}/{env}"), mode), &exp, |b, exp| {
                b.iter(|| exp.run_seeds().expect("run"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, seeds);
criterion_main!(benches);
