use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dfi::run::{run_sweep, Evaluator, ExecutionMode};
use dfi::scenario::Scenario;

fn sweep(c: &mut Criterion) {
    let mut sc = Scenario::default();
    sc.sweep.points = 64;
    let ev = Evaluator::from_scenario(&sc).unwrap();
    let freqs = sc.sweep.frequencies();

    let mut group = c.benchmark_group("sweep_64");
    group.sample_size(20);
    let mut modes = vec![("sequential", ExecutionMode::Sequential)];
    if cfg!(feature = "parallel") {
        modes.push(("parallel", ExecutionMode::Parallel));
    }
    for (name, mode) in modes {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| run_sweep(&ev, &freqs, mode))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
