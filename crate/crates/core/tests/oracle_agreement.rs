mod common;

use facthist::dag::{embed_dag, Dag};
use facthist::distributions::{is_cond_independent, ratio};
use facthist::history::{conditional_history, history, history_via_atoms, structurally_independent};
use facthist::verification::{gen_instance, gen_random_dag, SuiteConfig};
use facthist::{FactoredSpace, IndexSet, Limits, ProductDistribution, RandomVariable};

fn set(s: IndexSet) -> Vec<usize> {
    s.iter().collect()
}

fn xor_space() -> (FactoredSpace, RandomVariable) {
    let s = FactoredSpace::from_sizes(&[2, 2]).unwrap();
    let xor = RandomVariable::from_table("xor", 2, vec![0, 1, 1, 0]).unwrap();
    (s, xor)
}

#[test]
fn xor_histories_match_enumeration() {
    let (s, xor) = xor_space();
    let sizes = [2, 2];
    let u0 = s.factor_var(0).unwrap();
    let trivial = s.trivial_var();
    for (x, z) in [(&u0, &trivial), (&xor, &trivial), (&u0, &xor)] {
        let lib = conditional_history(&s, x, z).unwrap();
        let oracle = common::conditional_history(&sizes, &x.table, &z.table);
        assert_eq!(lib.per_block.len(), oracle.len());
        for (v, h) in &lib.per_block {
            assert_eq!(set(*h), oracle[v]);
        }
    }
    assert_eq!(common::conditional_history(&sizes, &u0.table, &trivial.table)[&0], vec![0]);
    assert_eq!(common::conditional_history(&sizes, &xor.table, &trivial.table)[&0], vec![0, 1]);
    assert_eq!(common::conditional_history(&sizes, &u0.table, &xor.table)[&1], vec![0, 1]);
}

#[test]
fn random_histories_match_enumeration() {
    let cfg = SuiteConfig::default();
    for k in 0..150 {
        let inst = gen_instance(&cfg, 1000, k);
        let s = &inst.space;
        let sizes = s.sizes().to_vec();
        for x in [&inst.x, &inst.y, &inst.w] {
            let oracle = common::conditional_history(&sizes, &x.table, &inst.z.table);
            for (v, c) in s.blocks_of(&inst.z).unwrap() {
                assert_eq!(set(history(s, &c, x)), oracle[&v], "instance {k}");
                assert_eq!(set(history_via_atoms(s, &c, x).unwrap()), oracle[&v], "instance {k}");
            }
        }
        assert_eq!(
            structurally_independent(s, &inst.x, &inst.y, &inst.z).unwrap().independent,
            common::structurally_independent(&sizes, &inst.x.table, &inst.y.table, &inst.z.table),
            "instance {k}"
        );
    }
}

#[test]
fn ci_matches_enumeration() {
    let cfg = SuiteConfig::default();
    for k in 0..80 {
        let inst = gen_instance(&cfg, 2000, k);
        let p = ProductDistribution::sample(&inst.space, k as u64);
        let lib = is_cond_independent(&inst.space, &p, &inst.x, &inst.y, &inst.z).unwrap().holds;
        let oracle = common::cond_independent(p.per_factor(), &inst.x.table, &inst.y.table, &inst.z.table);
        assert_eq!(lib, oracle, "instance {k}");
    }
}

#[test]
fn xor_witness_values() {
    let (s, xor) = xor_space();
    let u0 = s.factor_var(0).unwrap();
    let trivial = s.trivial_var();
    let uniform = ProductDistribution::uniform(&s);
    assert!(common::cond_independent(uniform.per_factor(), &u0.table, &xor.table, &trivial.table));
    let probs = vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(2, 3), ratio(1, 3)]];
    let joint = common::joint(&probs);
    // P(u0=1, xor=1) is the outcome (1, 0)
    assert_eq!(joint[2], common::rat(1, 3));
    let p_u0 = &joint[2] + &joint[3];
    let p_xor = &joint[1] + &joint[2];
    assert_eq!(p_u0 * p_xor, common::rat(1, 4));
    let p = ProductDistribution::new(&s, probs.clone()).unwrap();
    assert!(!is_cond_independent(&s, &p, &u0, &xor, &trivial).unwrap().holds);
    assert!(!common::cond_independent(&probs, &u0.table, &xor.table, &trivial.table));
}

fn edges(g: &Dag) -> Vec<(usize, usize)> {
    g.edges()
}

#[test]
fn d_separation_matches_path_enumeration() {
    for k in 0..150 {
        let g = gen_random_dag(11, k, 5, 3, 2);
        let e = edges(&g);
        let n = g.len();
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let rest = IndexSet::full(n) - IndexSet::singleton(x) - IndexSet::singleton(y);
                for z in rest.subsets() {
                    let zs: Vec<usize> = z.iter().collect();
                    assert_eq!(
                        g.d_separated(&[x], &[y], &zs).unwrap(),
                        common::d_separated(n, &e, x, y, &zs),
                        "dag {k}: {x} {y} {zs:?} edges {e:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn embedding_verdicts_match_path_enumeration() {
    let limits = Limits::default();
    for k in 0..30 {
        let g = gen_random_dag(12, k, 4, 2, 2);
        let e = edges(&g);
        let n = g.len();
        let emb = embed_dag(&g, &limits).unwrap();
        let sizes = emb.space.sizes().to_vec();
        for v in 0..n {
            let mut expected: Vec<usize> = common::ancestors(&e, v).into_iter().collect();
            expected.push(v);
            expected.sort_unstable();
            let h = history(&emb.space, &emb.space.full_block(), &emb.node_vars[v]);
            assert_eq!(set(h), expected, "dag {k} node {v}");
        }
        if emb.space.outcome_count() > 64 {
            continue;
        }
        // literal enumeration is only affordable on the smallest embeddings
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let z = emb.conditioning_var(&[]).unwrap();
                assert_eq!(
                    common::structurally_independent(&sizes, &emb.node_vars[x].table, &emb.node_vars[y].table, &z.table),
                    common::d_separated(n, &e, x, y, &[]),
                );
            }
        }
    }
}

#[test]
fn separation_condition_matches_event_enumeration() {
    use facthist::verification::separation_condition;
    let (s, xor) = xor_space();
    assert!(!common::separation_by_events(&[2, 2], &xor.table, &[0]));
    assert!(common::separation_by_events(&[2, 2], &xor.table, &[]));
    assert!(common::separation_by_events(&[2, 2], &xor.table, &[0, 1]));
    assert!(!separation_condition(&s, &xor, IndexSet::singleton(0)).unwrap());

    let cfg = SuiteConfig {
        max_domain: 2,
        max_factors: 3,
        ..SuiteConfig::default()
    };
    for k in 0..60 {
        let inst = gen_instance(&cfg, 3000, k);
        let sizes = inst.space.sizes().to_vec();
        for j in inst.space.all().subsets() {
            assert_eq!(
                separation_condition(&inst.space, &inst.z, j).unwrap(),
                common::separation_by_events(&sizes, &inst.z.table, &set(j)),
                "instance {k}, J = {j}"
            );
        }
    }
}
