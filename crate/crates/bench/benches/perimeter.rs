use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracperi::frac1d::frac_perimeter_1d;
use fracperi::frac_perimeter::{frac_perimeter_bp, frac_perimeter_ray, mc_frac_perimeter, PixelKernel};
use fracperi::isoperimetric::pixelize;
use fracperi::{IntervalUnion, PolygonRegion, QuadratureSpec, SymmetricBody, Vec2};

fn l_shape() -> PolygonRegion {
    PolygonRegion::simple(
        [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&(x, y)| Vec2::new(x, y))
            .collect(),
    )
    .unwrap()
}

fn one_d(c: &mut Criterion) {
    let u = IntervalUnion::new((0..32).map(|k| (3.0 * k as f64, 3.0 * k as f64 + 1.5)).collect()).unwrap();
    c.bench_function("frac1d/32 intervals", |b| {
        b.iter(|| frac_perimeter_1d(black_box(&u), 0.5).unwrap())
    });
}

fn planar(c: &mut Criterion) {
    let e = l_shape();
    let q = QuadratureSpec::default();
    let mut g = c.benchmark_group("planar");
    g.sample_size(20);
    for (name, k) in [
        ("ball", SymmetricBody::ball(1.0).unwrap()),
        ("square", SymmetricBody::square(1.0)),
        ("hexagon", SymmetricBody::regular(6, 1.0).unwrap()),
    ] {
        g.bench_with_input(BenchmarkId::new("bp", name), &k, |b, k| {
            b.iter(|| frac_perimeter_bp(&e, k, 0.5, &q).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("ray", name), &k, |b, k| {
            b.iter(|| frac_perimeter_ray(&e, k, 0.5, &q).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("mc-1e4", name), &k, |b, k| {
            b.iter(|| mc_frac_perimeter(&e, k, 0.5, 10_000, 1).unwrap())
        });
    }
    g.finish();
}

fn pixels(c: &mut Criterion) {
    let k = SymmetricBody::square(1.0);
    let disc = PolygonRegion::from_body(&SymmetricBody::regular(64, 4.0).unwrap()).unwrap();
    let e = pixelize(&disc, 8.0, 48).unwrap();
    let pk = PixelKernel::new(&k, 0.8, e.cell_size(), 48, 48).unwrap();
    let mut g = c.benchmark_group("pixel");
    g.sample_size(20);
    g.bench_function("energy 48x48", |b| b.iter(|| pk.energy(black_box(&e)).unwrap()));
    g.bench_function("flip delta", |b| {
        b.iter(|| pk.flip_delta(black_box(&e), 24, 10).unwrap())
    });
    g.finish();
}

criterion_group!(benches, one_d, planar, pixels);
criterion_main!(benches);
