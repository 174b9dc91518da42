use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use facthist::history::{history, history_via_atoms};
use facthist_bench::{parity, partial_parity};

fn enumeration_vs_atoms(c: &mut Criterion) {
    let mut g = c.benchmark_group("history");
    for n in [4, 8, 12] {
        let (s, x) = parity(n);
        let omega = s.full_block();
        g.bench_with_input(BenchmarkId::new("enumeration/parity", n), &n, |b, _| {
            b.iter(|| history(black_box(&s), &omega, &x))
        });
        g.bench_with_input(BenchmarkId::new("atoms/parity", n), &n, |b, _| {
            b.iter(|| history_via_atoms(black_box(&s), &omega, &x).unwrap())
        });
        let (s, x) = partial_parity(n, 2);
        let omega = s.full_block();
        g.bench_with_input(BenchmarkId::new("enumeration/small_history", n), &n, |b, _| {
            b.iter(|| history(black_box(&s), &omega, &x))
        });
    }
    g.finish();
}

criterion_group!(benches, enumeration_vs_atoms);
criterion_main!(benches);
