use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use facthist::distributions::{is_cond_independent, is_cond_independent_f64};
use facthist::history::structurally_independent;
use facthist::ProductDistribution;

fn ci_checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("independence");
    for n in [4, 8, 12] {
        let (s, _) = facthist_bench::parity(n);
        let x = s.factor_var(0).unwrap();
        let y = s.factor_var(n - 1).unwrap();
        let z = s.factor_var(1).unwrap();
        let p = ProductDistribution::sample(&s, 1);
        let pf = p.to_f64();
        g.bench_with_input(BenchmarkId::new("exact", n), &n, |b, _| {
            b.iter(|| is_cond_independent(black_box(&s), &p, &x, &y, &z).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("f64", n), &n, |b, _| {
            b.iter(|| is_cond_independent_f64(black_box(&s), &pf, &x, &y, &z, 1e-9).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("structural", n), &n, |b, _| {
            b.iter(|| structurally_independent(black_box(&s), &x, &y, &z).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, ci_checks);
criterion_main!(benches);
