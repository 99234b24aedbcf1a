use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use igeflow::geodesic::{integrate_geodesic, GeodesicOptions};
use igeflow::ige::{ige_series, SeriesOptions};
use igeflow::models::{catalog, fisher_metric_numeric, DEFAULT_METRIC_STEP};
use igeflow::Execution;

fn strategies() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn volumes(c: &mut Criterion) {
    let m = catalog("gaussian_product_2").unwrap();
    let path = integrate_geodesic(
        &m,
        &[0.0, 1.0, 1.0, 2.0],
        &[1.0, 0.3, -0.5, 0.2],
        3.0,
        &GeodesicOptions::default(),
    )
    .unwrap();
    let grid: Vec<f64> = (1..=200).map(|i| 3.0 * i as f64 / 200.0).collect();
    let mut group = c.benchmark_group("ige_series");
    for (label, execution) in strategies() {
        let opts = SeriesOptions {
            quad_rel_tol: 1e-9,
            execution,
            ..SeriesOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| ige_series(&m, &path, &grid, &opts).unwrap())
        });
    }
    group.finish();
}

fn metric_sweep(c: &mut Criterion) {
    let m = catalog("gaussian_1d").unwrap();
    let points: Vec<[f64; 2]> = (0..64)
        .map(|i| [-2.0 + 0.0625 * i as f64, 0.5 + 0.03 * i as f64])
        .collect();
    let mut group = c.benchmark_group("entropy_hessian_sweep");
    for (label, execution) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| execution.map(&points, |p| fisher_metric_numeric(&m, p, DEFAULT_METRIC_STEP).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, volumes, metric_sweep);
criterion_main!(benches);
