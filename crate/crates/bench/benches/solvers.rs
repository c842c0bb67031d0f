use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ldgshishkin_bench::{setup_1d, setup_2d};
use ldgshishkin_core::ldg1d::{assemble_1d, solve_ldg_1d, SolverKind, SolverOptions};
use ldgshishkin_core::ldg2d::solve_ldg_2d;
use ldgshishkin_core::norms::{default_error_quad, error_norms_1d};

fn bench_1d(c: &mut Criterion) {
    let mut g = c.benchmark_group("ldg1d");
    for &(n, k) in &[(256usize, 1usize), (256, 3), (1024, 2)] {
        let (p, m) = setup_1d(n, 1e-8, k);
        g.bench_with_input(BenchmarkId::new("assemble", format!("N{n}_k{k}")), &(), |b, _| {
            b.iter(|| assemble_1d(&p, &m, k, &SolverOptions::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("solve", format!("N{n}_k{k}")), &(), |b, _| {
            b.iter(|| solve_ldg_1d(&p, &m, k, &SolverOptions::default()).unwrap())
        });
        let (w, _) = solve_ldg_1d(&p, &m, k, &SolverOptions::default()).unwrap();
        g.bench_with_input(BenchmarkId::new("error_norms", format!("N{n}_k{k}")), &(), |b, _| {
            b.iter(|| error_norms_1d(&w, &p, default_error_quad(k)).unwrap())
        });
    }
    g.finish();
}

fn bench_2d(c: &mut Criterion) {
    let mut g = c.benchmark_group("ldg2d");
    g.sample_size(10);
    for &n in &[16usize, 32] {
        let (p, m) = setup_2d(n, 1e-8, 1);
        for kind in [SolverKind::Condensed, SolverKind::Banded] {
            let opts = SolverOptions { kind, ..SolverOptions::default_2d() };
            g.bench_with_input(BenchmarkId::new(format!("{kind:?}"), format!("N{n}_k1")), &(), |b, _| {
                b.iter(|| solve_ldg_2d(&p, &m, 1, &opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench_1d, bench_2d);
criterion_main!(benches);
