//! `parallel::map` (rayon with the default feature) against the sequential
//! baseline, for propagator evaluation on a time grid and for coupling sweeps.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use driven_tls::interaction::InteractionSpec;
use driven_tls::parallel::{map, map_sequential};
use driven_tls::pipeline::Prepared;

fn case_a() -> Prepared {
    let spec = InteractionSpec::monochromatic(1.0, 2.0, 0.0).unwrap();
    Prepared::new(&spec, 40, None, false).unwrap()
}

fn t_grid(c: &mut Criterion) {
    let (g, model) = case_a().model_at(0.10).unwrap();
    let mut group = c.benchmark_group("t_grid");
    for n in [1_000usize, 10_000, 100_000] {
        let t_end = g.secular_period();
        let ts: Vec<f64> = (0..n).map(|k| t_end * k as f64 / n as f64).collect();
        group.bench_with_input(BenchmarkId::new("sequential", n), &ts, |b, ts| {
            b.iter(|| map_sequential(black_box(ts), |&t| model.evaluate_u(t)))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &ts, |b, ts| {
            b.iter(|| map(black_box(ts), |&t| model.evaluate_u(t)))
        });
    }
    group.finish();
}

fn eps_sweep(c: &mut Criterion) {
    let prep = case_a();
    let ts: Vec<f64> = (0..2_000).map(|k| 0.05 * k as f64).collect();
    // sum, assemble and evaluate per coupling
    let job = |&eps: &f64| {
        let (_, model) = prep.model_at(eps).unwrap();
        ts.iter().map(|&t| model.transition_probability(t)).sum::<f64>()
    };
    let mut group = c.benchmark_group("eps_sweep");
    group.sample_size(20);
    for n in [8usize, 32] {
        let eps: Vec<f64> = (0..n).map(|k| 0.01 + 0.3 * k as f64 / n as f64).collect();
        group.bench_with_input(BenchmarkId::new("sequential", n), &eps, |b, eps| {
            b.iter(|| map_sequential(black_box(eps), job))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &eps, |b, eps| {
            b.iter(|| map(black_box(eps), job))
        });
    }
    group.finish();
}

criterion_group!(benches, t_grid, eps_sweep);
criterion_main!(benches);
