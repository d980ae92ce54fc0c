use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use seqwarp_core::fields::{geodesic_condition_residuals, integrate_geodesic, GeodesicState};
use seqwarp_core::fixtures;
use seqwarp_core::geometry::curvature_at;
use seqwarp_core::swp::{compare_oracle, verify_theorems, CompareOptions, Theorem, VerifyConfig};

fn curvature(c: &mut Criterion) {
    let s3 = fixtures::round_s3();
    let generic = fixtures::generic_curved();
    let p = [1.0, 1.2, 0.4];
    c.bench_function("curvature_at/round_s3", |b| b.iter(|| curvature_at(s3.total(), black_box(&p)).unwrap()));
    let q = generic.samples(1, 42).remove(0);
    c.bench_function("curvature_at/generic", |b| b.iter(|| curvature_at(generic.total(), black_box(&q)).unwrap()));
}

fn closed_forms(c: &mut Criterion) {
    let swp = fixtures::generic_curved();
    let samples = swp.samples(10, 42);
    let opts = CompareOptions::default();
    c.bench_function("compare_oracle/ricci_4/10", |b| {
        b.iter(|| compare_oracle(&swp, Theorem::Ricci, 4, black_box(&samples), &opts).unwrap())
    });
    let cone = fixtures::polar_cone();
    let cfg = VerifyConfig { samples: 5, ..VerifyConfig::default() };
    let mut group = c.benchmark_group("verify_theorems");
    group.sample_size(10);
    group.bench_function("polar_cone/5", |b| b.iter(|| verify_theorems(&cone, black_box(&cfg)).unwrap()));
    group.finish();
}

fn geodesics(c: &mut Criterion) {
    let cone = fixtures::polar_cone();
    let init = GeodesicState::new(0.0, vec![1.0, 0.1, -0.2], vec![0.3, 0.2, 0.1]);
    let mut group = c.benchmark_group("geodesic");
    group.sample_size(20);
    group.bench_function("integrate/polar_cone/2000", |b| {
        b.iter(|| integrate_geodesic(&cone, black_box(&init), 2.0, 1e-3).unwrap())
    });
    let traj = integrate_geodesic(&cone, &init, 2.0, 1e-3).unwrap();
    group.bench_function("residuals/polar_cone/2000", |b| {
        b.iter(|| geodesic_condition_residuals(&cone, black_box(&traj)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, curvature, closed_forms, geodesics);
criterion_main!(benches);
