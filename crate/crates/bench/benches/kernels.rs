use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use framed_bench::example;
use framed_core::expr::parse;
use framed_core::schwarzian::{schwarzian, schwarzian_from_jets, solve_schwarzian_series};
use framed_core::spectral::{assemble, build_mesh, inertia};
use num_complex::Complex64 as C64;
use std::hint::black_box;

fn schwarzian_kernels(c: &mut Criterion) {
    let f = parse("(z^3 + 2*z - 1) / (z^2 + 3)").unwrap();
    let g = parse("z + 0.3*z^2").unwrap();
    let z = C64::new(0.4, -0.7);
    let q = schwarzian(&f, &g).unwrap();
    c.bench_function("schwarzian/symbolic_eval", |b| b.iter(|| q.eval(black_box(z)).unwrap()));
    c.bench_function("schwarzian/jets", |b| {
        b.iter(|| {
            let (jf, jg) = (f.jet(black_box(z), 4).unwrap(), g.jet(z, 4).unwrap());
            schwarzian_from_jets(&jf, &jg).unwrap()
        })
    });
    let sigma = parse("z^2 * (1 + z) / (2 - z)").unwrap();
    let mut group = c.benchmark_group("schwarzian/series");
    for n in [24usize, 48] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| solve_schwarzian_series(black_box(&sigma), 2, n).unwrap())
        });
    }
    group.finish();
}

fn spectral_kernels(c: &mut Criterion) {
    let s = example("scherk");
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    group.bench_function("mesh/scherk_R5_h0.2", |b| b.iter(|| build_mesh(&s, 5.0, 0.2).unwrap()));
    let mesh = build_mesh(&s, 5.0, 0.2).unwrap();
    group.bench_function("assemble/scherk_R5_h0.2", |b| b.iter(|| assemble(&s, &mesh).unwrap()));
    let asm = assemble(&s, &mesh).unwrap();
    group.bench_function("inertia/scherk_R5_h0.2", |b| {
        b.iter(|| inertia(black_box(&asm.a), &asm.order).unwrap())
    });
    group.finish();
}

criterion_group!(benches, schwarzian_kernels, spectral_kernels);
criterion_main!(benches);
