//! Each workload on the global pool against the same call pinned to one
//! worker. Built without the `parallel` feature both arms are sequential.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use sector_descent::curve::is_sdc;
use sector_descent::minimize::{minimize_phi, Family, MinimizationProblem};
use sector_descent::par;
use sector_descent::phi::phi_quadrature;
use sector_descent::sector::Sector;
use sector_descent::sphere::Vec3;
use sector_descent::spiral::generate_hat_curve;

fn compare<R: Send>(c: &mut Criterion, name: &str, f: impl Fn() -> R + Sync + Send) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    g.bench_function("parallel", |b| b.iter(|| black_box(f())));
    g.bench_function("sequential", |b| b.iter(|| black_box(par::sequential(&f))));
    g.finish();
}

fn benches(c: &mut Criterion) {
    let problem = MinimizationProblem { restarts: 8, ..MinimizationProblem::new(Family::Polygons { k: 4 }, 1) };
    compare(c, "minimize_polygons_k4", || minimize_phi(&problem).unwrap().value);

    let hat = generate_hat_curve(2.0, 3000).unwrap();
    compare(c, "is_sdc_hat_3000", || is_sdc(&hat, 1e-9).holds);

    let orthant = Sector::orthant();
    compare(c, "phi_quadrature_level6", || phi_quadrature(&orthant, &Vec3::x(), 6).unwrap().value);
}

criterion_group!(group, benches);
criterion_main!(group);
