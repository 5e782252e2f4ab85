use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use knotspace::immersion::presets;
use knotspace::immersion::{mean_curvature, tangent_frame};
use knotspace::verification::random_normal_field;
use knotspace::{AmbientSpace, KnotSpace, LinearVcp};

fn cross_products(c: &mut Criterion) {
    let mut group = c.benchmark_group("chi");
    for vcp in [LinearVcp::g2(), LinearVcp::spin7(), LinearVcp::volume_form(4).unwrap()] {
        let m = vcp.dim();
        let args: Vec<Vec<f64>> = (0..vcp.fold()).map(|k| (0..m).map(|i| ((i * 7 + k * 3) as f64).sin()).collect()).collect();
        let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
        let mut out = vec![0.0; m];
        group.bench_function(vcp.kind().name(), |b| b.iter(|| vcp.eval_into(black_box(&refs), &mut out)));
    }
    group.finish();
}

fn immersion_geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("mean_curvature");
    for n in [64, 256, 1024] {
        let imm = presets::trefoil(7, n).unwrap();
        group.bench_with_input(BenchmarkId::new("trefoil_r7", n), &imm, |b, imm| b.iter(|| mean_curvature(imm).unwrap()));
    }
    for n in [16, 32, 64] {
        let imm = presets::clifford_torus(8, 1.0, n, n).unwrap();
        group.bench_with_input(BenchmarkId::new("torus_r8", n), &imm, |b, imm| b.iter(|| mean_curvature(imm).unwrap()));
    }
    group.finish();

    let imm = presets::clifford_torus(8, 1.0, 64, 64).unwrap();
    c.bench_function("tangent_frame/torus_r8/64", |b| b.iter(|| tangent_frame(black_box(&imm)).unwrap()));
}

fn knot_tensors(c: &mut Criterion) {
    let mut group = c.benchmark_group("knot");
    group.sample_size(10);
    let space = KnotSpace::new(AmbientSpace::euclidean(LinearVcp::g2())).with_richardson(true);
    for n in [32, 128] {
        let p = space.point(presets::circle(7, 1.0, n).unwrap()).unwrap();
        let u = random_normal_field(&space, &p, 1, 4).unwrap();
        let v = random_normal_field(&space, &p, 2, 4).unwrap();
        group.bench_function(BenchmarkId::new("apply_j/g2_circle", n), |b| b.iter(|| space.apply_j(&u).unwrap()));
        group.bench_function(BenchmarkId::new("nijenhuis/g2_circle", n), |b| b.iter(|| space.nijenhuis(&u, &v).unwrap()));
    }
    let space = KnotSpace::new(AmbientSpace::euclidean(LinearVcp::spin7())).with_richardson(true);
    let p = space.point(presets::clifford_torus(8, 1.0, 32, 32).unwrap()).unwrap();
    let u = random_normal_field(&space, &p, 1, 4).unwrap();
    let v = random_normal_field(&space, &p, 2, 4).unwrap();
    group.bench_function("nijenhuis/spin7_torus/32", |b| b.iter(|| space.nijenhuis(&u, &v).unwrap()));
    group.finish();
}

criterion_group!(benches, cross_products, immersion_geometry, knot_tensors);
criterion_main!(benches);
