use criterion::{black_box, criterion_group, criterion_main, Criterion};
use efie_core::linalg::random_vector;
use efie_core::mesh::{generate_sphere, GeometricOrder};
use efie_core::operators::assemble_blocks;
use efie_core::projectors::apply_dense;
use efie_core::{BasisSpace, ProjectorPair, QuadratureConfig, StarVariant};

fn assembly(c: &mut Criterion) {
    let mesh = generate_sphere(1.0, 1, GeometricOrder::Quadratic).unwrap();
    let cfg = QuadratureConfig::default();
    let mut group = c.benchmark_group("assemble_blocks");
    group.sample_size(10);
    for p in 0..3 {
        let basis = BasisSpace::new(&mesh, p).unwrap();
        group.bench_function(format!("icosphere1_p{p}"), |b| {
            b.iter(|| assemble_blocks(&mesh, &basis, black_box(1.0), &cfg).unwrap())
        });
    }
    group.finish();
}

fn projectors(c: &mut Criterion) {
    let mesh = generate_sphere(1.0, 1, GeometricOrder::Quadratic).unwrap();
    let basis = BasisSpace::new(&mesh, 2).unwrap();
    let pair = ProjectorPair::build(&mesh, &basis, StarVariant::LagrangeTested).unwrap();
    let x = random_vector(pair.len(), 1);
    let mut group = c.benchmark_group("projector_p2");
    group.sample_size(10);
    group.bench_function("apply_psigma_cg", |b| {
        b.iter(|| pair.apply_psigma(black_box(&x)).unwrap())
    });
    group.bench_function("dense_psigma_cholesky", |b| {
        b.iter(|| pair.dense_psigma().unwrap())
    });
    let ps = pair.dense_psigma().unwrap();
    group.bench_function("apply_dense", |b| {
        b.iter(|| apply_dense(&ps, black_box(&x)))
    });
    group.finish();
}

criterion_group!(benches, assembly, projectors);
criterion_main!(benches);
