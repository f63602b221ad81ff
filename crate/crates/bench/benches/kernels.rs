use std::hint::black_box;

use corrlab_core::linalg::tridiagonal_lowest;
use corrlab_core::spectral::helmholtz_fd_matrix;
use corrlab_core::{GreenKernel1D, GreenOperator, HelmholtzProblem, MaProcessSpec, Mesh1D};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn green_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("green_apply");
    for n in [801, 3201, 12801] {
        let mesh = Mesh1D::uniform(1.0, n).unwrap();
        let op = GreenOperator::new(GreenKernel1D::unit(1.0, 1.0).unwrap(), &mesh).unwrap();
        let f = mesh.map(|x| (3.0 * x).sin());
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| op.apply(black_box(f)).unwrap()));
    }
    group.finish();
}

fn helmholtz_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("helmholtz_solve");
    for eps in [0.01, 0.0025] {
        let mesh = Mesh1D::resolving(eps, 8).unwrap();
        let f = vec![1.0; mesh.len()];
        let p = HelmholtzProblem::new(
            GreenKernel1D::unit(1.0, 0.0).unwrap(),
            mesh,
            MaProcessSpec::rademacher(&[0.5, 0.5]),
            f,
            eps,
        )
        .unwrap();
        let mut seed = 0;
        group.bench_function(BenchmarkId::from_parameter(format!("1/{}", (1.0 / eps).round())), |b| {
            b.iter(|| {
                seed += 1;
                p.perturbed_solve(black_box(seed), 1e-10).unwrap()
            })
        });
    }
    group.finish();
}

fn tridiagonal_eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("tridiagonal_eigen");
    let mesh = Mesh1D::uniform(1.0, 3201).unwrap();
    let q = mesh.map(|x| (40.0 * x).cos());
    let (diag, off) = helmholtz_fd_matrix(1.0, 0.0, &mesh, &q);
    for count in [3, 9] {
        group.bench_with_input(BenchmarkId::from_parameter(count), &count, |b, &k| {
            b.iter(|| tridiagonal_lowest(black_box(&diag), &off, k, 1e-12).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, green_apply, helmholtz_solve, tridiagonal_eigen);
criterion_main!(benches);
