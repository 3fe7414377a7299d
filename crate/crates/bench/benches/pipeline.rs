//! Criterion benchmarks of the pipeline's hot stages.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mwce_core::complex::generators::{generate_model, ModelSpec};
use mwce_core::complex::CylinderSpec;
use mwce_core::dec::{Bc, MetricOps, Tolerances};
use mwce_core::hodge::harmonic_basis;
use mwce_core::modes::{s_matrix, PiecewiseCylinderModel};
use mwce_core::scatlen::{q_sample, run_scatlen};
use num_complex::Complex64;

fn bench_assemble(c: &mut Criterion) {
    let (m, _) = generate_model(
        &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
        32,
    )
    .unwrap();
    c.bench_function("assemble_flat_cylinder_res32", |b| {
        b.iter(|| MetricOps::assemble(&m).unwrap())
    });
}

fn bench_harmonic(c: &mut Criterion) {
    let (m, _) = generate_model(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 24).unwrap();
    let ops = MetricOps::assemble(&m).unwrap();
    let tol = Tolerances::default();
    c.bench_function("harmonic_basis_annulus_h1_rel", |b| {
        b.iter(|| harmonic_basis(&m, &ops, 1, Bc::Relative, 7, &tol).unwrap())
    });
}

fn bench_q_sample(c: &mut Criterion) {
    let (m, _) = generate_model(
        &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
        16,
    )
    .unwrap();
    let ops = MetricOps::assemble(&m).unwrap();
    let tol = Tolerances::default();
    let sc = mwce_core::les::s_zero(&m, &ops, 0, 7, &tol).unwrap();
    let minus = sc.minus_eigenspace_cochains(&m.boundary_structure().unwrap().complex);
    c.bench_function("q_sample_cylinder_a1", |b| {
        b.iter(|| q_sample(&m, 0, &minus, 1.0, 16, 7, &tol).unwrap())
    });
}

fn bench_attach(c: &mut Criterion) {
    let (m, _) = generate_model(
        &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
        32,
    )
    .unwrap();
    c.bench_function("attach_cylinder_res32_a2", |b| {
        b.iter_batched(
            || CylinderSpec::new(2.0, 32),
            |spec| mwce_core::attach_cylinder(&m, &spec).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_modes_grid(c: &mut Criterion) {
    let model = PiecewiseCylinderModel::new(vec![(1.0, 2.0), (1.0, 1.0)], 0.0).unwrap();
    c.bench_function("s_matrix_grid_100", |b| {
        b.iter(|| {
            for k in 1..=100 {
                let lam = 0.05 * k as f64;
                s_matrix(&model, Complex64::new(lam, 0.0)).unwrap();
            }
        })
    });
}

fn bench_full_pipeline(c: &mut Criterion) {
    let (m, _) = generate_model(
        &ModelSpec::FlatCylinder { length: 2.0, circumference: 1.0 },
        16,
    )
    .unwrap();
    let ops = MetricOps::assemble(&m).unwrap();
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("run_scatlen_cylinder_res16", |b| {
        b.iter(|| {
            run_scatlen(&m, &ops, 0, &[1.0, 2.0, 3.0], 2.0 * std::f64::consts::PI, 7, 1e-8, &tol)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_assemble,
    bench_harmonic,
    bench_q_sample,
    bench_attach,
    bench_modes_grid,
    bench_full_pipeline
);
criterion_main!(benches);
