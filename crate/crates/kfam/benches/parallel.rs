//! Parallel core against a one-thread pool on the data-parallel hot paths.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kfam::asym;
use kfam::catalog::make_family;
use kfam::lagrange::{self, LagrangianSpec};
use kfam::series::{self, CoeffSeries};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bench(c: &mut Criterion) {
    let exp = make_family(&"exp".parse().unwrap(), 20_000).unwrap();
    let psi = CoeffSeries::exp_z(160);
    let spec = LagrangianSpec::borel(exp.clone(), 0.5, 1);
    let mut g = c.benchmark_group("core");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("lagrange_invert_160", name), &pool, |b, p| {
            b.iter(|| p.install(|| series::lagrange_invert(&psi, 160).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("strong_gaussian_e^z_t1000", name), &pool, |b, p| {
            b.iter(|| p.install(|| asym::strong_gaussian_integral(&exp, 1000.0).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("gw_sample_1e5", name), &pool, |b, p| {
            b.iter(|| p.install(|| lagrange::gw_sample(&spec, 100_000, 7, lagrange::GW_NODE_CAP).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
