use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use restriction_lab::extension::{extend, extend_points};
use restriction_lab::lorentz::lorentz_norm;
use restriction_lab::slicing::ChainRunner;
use restriction_lab::LorentzParams;
use restriction_lab_bench::{chain_fixture, circle_density, eval_box, samples};

fn bench_extend(c: &mut Criterion) {
    let d = circle_density(4096);
    let mut g = c.benchmark_group("extend");
    for res in [33, 65] {
        let grid = eval_box(4.0, res);
        g.bench_with_input(BenchmarkId::new("circle_grid", res), &grid, |b, grid| b.iter(|| extend(&d, grid).unwrap()));
    }
    let pts: Vec<Vec<f64>> = (0..256).map(|i| vec![i as f64 * 0.03, -(i as f64) * 0.02]).collect();
    g.bench_function("circle_points_256", |b| b.iter(|| extend_points(&d, &pts).unwrap()));
    g.finish();
}

fn bench_lorentz(c: &mut Criterion) {
    let mut g = c.benchmark_group("lorentz_norm");
    for n in [1_000, 100_000] {
        let f = samples(n);
        g.bench_with_input(BenchmarkId::new("L3_2", n), &f, |b, f| b.iter(|| lorentz_norm(f, LorentzParams::new(3.0, 2.0).unwrap()).unwrap()));
        g.bench_with_input(BenchmarkId::new("weak3", n), &f, |b, f| b.iter(|| lorentz_norm(f, LorentzParams::weak(3.0)).unwrap()));
    }
    g.finish();
}

fn bench_chain(c: &mut Criterion) {
    let (setup, corpus) = chain_fixture(2);
    let runner = ChainRunner::new(&setup).unwrap();
    let mut g = c.benchmark_group("chain");
    g.sample_size(10);
    g.bench_function("sphere_runner_new", |b| b.iter(|| ChainRunner::new(&setup).unwrap()));
    let (label, u) = &corpus[1];
    g.bench_function("sphere_run_one", |b| b.iter(|| runner.run(u.as_ref(), label, 1.0).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_extend, bench_lorentz, bench_chain);
criterion_main!(benches);
