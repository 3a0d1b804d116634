//! Data-parallel versus sequential execution of the same workloads.
//!
//! Without the `parallel` feature both arms run sequentially, which makes the
//! fallback cost visible: `cargo bench -p gdnls-core --no-default-features`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gdnls::analysis::bernstein_audit;
use gdnls::integrators::{evolve, StepConfig};
use gdnls::model::ModelParams;
use gdnls::{Complex64, Execution, FieldState, Grid, LpLadder};

const ARMS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ensemble(c: &mut Criterion) {
    let grid = Grid::new(256, 40.0).unwrap();
    let p = ModelParams::gdnls(1.0);
    let step = StepConfig::new(1e-3).record_every(1000);
    let data: Vec<FieldState> = (0..16)
        .map(|i| {
            let a = 0.2 + 0.05 * i as f64;
            FieldState::from_fn(&grid, 0.0, |x| Complex64::new(a * (-x * x).exp(), 0.0)).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("evolve_ensemble");
    group.sample_size(10);
    for (name, exec) in ARMS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&data, |u| evolve(u, &p, 0.1, &step).unwrap().last().map(|u| u.l2_norm())))
        });
    }
    group.finish();
}

fn audit(c: &mut Criterion) {
    let grid = Grid::new(1024, 20.0).unwrap();
    let ladder = LpLadder::new(&grid);
    let mut group = c.benchmark_group("bernstein_audit");
    group.sample_size(10);
    for (name, exec) in ARMS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bernstein_audit(&ladder, 1.0, 64, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble, audit);
criterion_main!(benches);
