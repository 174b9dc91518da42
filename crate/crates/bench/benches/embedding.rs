use criterion::{black_box, criterion_group, criterion_main, Criterion};
use facthist::dag::{all_single_queries, dsep_structural_equivalence, embed_dag, Dag};
use facthist::Limits;

fn dags() -> Vec<(&'static str, Dag)> {
    vec![
        ("chain4", Dag::with_uniform_domain(&["A", "B", "C", "D"], 2, &[(0, 1), (1, 2), (2, 3)]).unwrap()),
        ("collider", Dag::with_uniform_domain(&["A", "B", "C"], 2, &[(0, 2), (1, 2)]).unwrap()),
        (
            "diamond",
            Dag::with_uniform_domain(&["A", "B", "C", "D"], 2, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap(),
        ),
    ]
}

fn embedding(c: &mut Criterion) {
    let limits = Limits::default();
    let mut g = c.benchmark_group("embedding");
    for (name, dag) in dags() {
        g.bench_function(format!("embed/{name}"), |b| b.iter(|| embed_dag(black_box(&dag), &limits).unwrap()));
        let queries = all_single_queries(&dag);
        g.bench_function(format!("equivalence/{name}"), |b| {
            b.iter(|| dsep_structural_equivalence(black_box(&dag), &queries, &limits).unwrap())
        });
        g.bench_function(format!("dsep/{name}"), |b| {
            b.iter(|| {
                queries
                    .iter()
                    .filter(|q| dag.d_separated(&[q.x], &[q.y], &q.given).unwrap())
                    .count()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, embedding);
criterion_main!(benches);
