use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use momentpde::growth::{fit_order_logs, norm_sequence};
use momentpde::sequences::{verify_lemma_suite, Family, MomentSequence};
use momentpde::solver::{residual, solve_constant, solve_variable};
use momentpde_bench::{heat, plane};
use std::hint::black_box;

fn bench_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for n_t in [20, 40] {
        let p = heat(n_t, 2 * n_t);
        group.bench_with_input(BenchmarkId::new("heat_variable", n_t), &p, |b, p| {
            b.iter(|| solve_variable(black_box(p), p.n_t).unwrap())
        });
    }
    let p = plane(20, 12);
    group.bench_function("plane_variable", |b| b.iter(|| solve_variable(black_box(&p), 20).unwrap()));
    group.bench_function("plane_constant", |b| b.iter(|| solve_constant(black_box(&p), 20).unwrap()));
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let p = heat(40, 80);
    let u = solve_variable(&p, 40).unwrap();
    c.bench_function("residual_heat_40", |b| b.iter(|| residual(black_box(&p), black_box(&u)).unwrap()));
    c.bench_function("fit_heat_40", |b| {
        b.iter(|| {
            let logs = norm_sequence(black_box(&u), 0.1).unwrap().log_values;
            fit_order_logs(&logs, &p.reference, (10, 40)).unwrap()
        })
    });
}

fn bench_lemmas(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_suite");
    for (name, family) in [("factorial", Family::Factorial), ("gevrey_2", Family::Gevrey { s: 2.0 })] {
        let seq = MomentSequence::new(family, 64).unwrap();
        group.bench_function(name, |b| b.iter(|| verify_lemma_suite(black_box(&seq), 40).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_solvers, bench_certify, bench_lemmas);
criterion_main!(benches);
