use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use reebsphere::contact::reeb_field;
use reebsphere::linalg::pfaffian;
use reebsphere::quaternionic::{det_winding, sample_loop};
use reebsphere::sampling::sphere_point;
use reebsphere::sphere_family::{LinearContactSphere, SphereFamilyFibration};
use reebsphere::transport::{horizontal_lift, BaseCoords};
use reebsphere::{QuaternionicTriple, SphereDirection};

fn bench_reeb(c: &mut Criterion) {
    let mut group = c.benchmark_group("reeb_field");
    for n in [0, 1, 3] {
        let s = LinearContactSphere::new(n).unwrap();
        let form = s.form(&SphereDirection::from_angles(0.7, 1.1)).unwrap();
        let p = sphere_point(s.dim(), 0, "bench", 0);
        group.bench_with_input(BenchmarkId::from_parameter(s.dim()), &p, |b, p| {
            b.iter(|| reeb_field(black_box(&form), black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn bench_lift(c: &mut Criterion) {
    let fib = SphereFamilyFibration::new(LinearContactSphere::new(1).unwrap());
    let p = sphere_point(8, 0, "bench", 1);
    let base = BaseCoords::new(1.2, 0.4);
    c.bench_function("horizontal_lift/8", |b| {
        b.iter(|| horizontal_lift(black_box(&fib), black_box(&p), base, [1.0, 0.0]).unwrap())
    });
}

fn bench_winding(c: &mut Criterion) {
    let mut group = c.benchmark_group("det_winding");
    for m in [1, 2, 4] {
        let t = QuaternionicTriple::build(m).unwrap();
        let n = t.dim();
        let samples = sample_loop(128, |s| DMatrix::identity(n, n) * s.cos() + t.i().matrix() * s.sin());
        group.bench_with_input(BenchmarkId::from_parameter(n), &samples, |b, samples| {
            b.iter(|| det_winding(black_box(samples), t.i()).unwrap())
        });
    }
    group.finish();
}

fn bench_pfaffian(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian");
    for n in [6, 14, 30] {
        let g = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let skew = &g - g.transpose();
        group.bench_with_input(BenchmarkId::from_parameter(n), &skew, |b, m| b.iter(|| pfaffian(black_box(m))));
    }
    group.finish();
}

criterion_group!(benches, bench_reeb, bench_lift, bench_winding, bench_pfaffian);
criterion_main!(benches);
