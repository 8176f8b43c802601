use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pmc_core::discretization::{assemble_jacobian_with, assemble_residual_with, Field, Grid};
use pmc_core::oracles::spherical_cap_oracle;
use pmc_core::Exec;

fn assembly(c: &mut Criterion) {
    let cap = spherical_cap_oracle(2.0, 1.0, 2);
    let problem = cap.problem();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for nr in [32, 128] {
        let grid = Arc::new(Grid::polar(cap.domain(), nr, 64).unwrap());
        // perturbed so the Newton-relevant terms are all nonzero
        let u = Field::from_fn(grid, |x| cap.u(x) + 0.01 * (3.0 * x[0]).sin());
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            group.bench_with_input(BenchmarkId::new(format!("residual/{name}"), nr), &u, |b, u| {
                b.iter(|| assemble_residual_with(&problem, u, exec).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("jacobian/{name}"), nr), &u, |b, u| {
                b.iter(|| assemble_jacobian_with(&problem, u, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, assembly);
criterion_main!(benches);
