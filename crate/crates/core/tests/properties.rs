mod common;

use facthist::distributions::{cond_table, is_cond_independent};
use facthist::history::{history, history_via_atoms, is_rectangle, structurally_independent};
use facthist::{FactoredSpace, IndexSet, ProductDistribution, RandomVariable};
use num_traits::One;
use proptest::prelude::*;

/// A space plus `count` variables, each a random function of a random
/// subset of factors.
fn model(count: usize) -> impl Strategy<Value = (FactoredSpace, Vec<RandomVariable>)> {
    prop::collection::vec(2usize..=3, 1..=4).prop_flat_map(move |sizes| {
        let var = (any::<u64>(), 1u32..=4, prop::collection::vec(any::<u32>(), 81));
        (Just(sizes), prop::collection::vec(var, count)).prop_map(|(sizes, specs)| {
            let s = FactoredSpace::from_sizes(&sizes).unwrap();
            let vars = specs
                .into_iter()
                .enumerate()
                .map(|(k, (mask, codomain, values))| {
                    let support = IndexSet::from_bits(mask) & s.all();
                    let table = (0..s.outcome_count())
                        .map(|r| values[s.project(r, support)] % codomain)
                        .collect();
                    RandomVariable::from_table(format!("v{k}"), codomain as usize, table).unwrap()
                })
                .collect();
            (s, vars)
        })
    })
}

fn set(s: IndexSet) -> Vec<usize> {
    s.iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn history_is_the_minimal_generating_set((s, v) in model(2)) {
        let (x, z) = (&v[0], &v[1]);
        let sizes = s.sizes().to_vec();
        let xk = common::keyed(&sizes, &x.table);
        for (_, c) in s.blocks_of(z).unwrap() {
            let outs: Vec<Vec<usize>> = c.outcomes.iter().map(|&r| common::digits(&sizes, r)).collect();
            let h = history(&s, &c, x);
            prop_assert_eq!(set(h), common::history(sizes.len(), &outs, &xk));
            prop_assert_eq!(history_via_atoms(&s, &c, x).unwrap(), h);
            for j in s.all().subsets() {
                prop_assert_eq!(is_rectangle(&s, &c, j), common::rectangle(&outs, &set(j)));
            }
        }
    }

    #[test]
    fn history_of_a_pair_is_the_union((s, v) in model(3)) {
        let xy = s.pair_var(&v[0], &v[1]).unwrap();
        for (_, c) in s.blocks_of(&v[2]).unwrap() {
            prop_assert_eq!(history(&s, &c, &xy), history(&s, &c, &v[0]) | history(&s, &c, &v[1]));
        }
    }

    #[test]
    fn post_composition_shrinks_history((s, v) in model(2), f in prop::collection::vec(0u32..3, 4)) {
        let x = &v[0];
        let fx = RandomVariable::from_table("f", 3, x.table.iter().map(|&a| f[a as usize]).collect()).unwrap();
        for (_, c) in s.blocks_of(&v[1]).unwrap() {
            prop_assert!(history(&s, &c, &fx).is_subset(history(&s, &c, x)));
        }
    }

    #[test]
    fn empty_history_iff_constant((s, v) in model(2)) {
        for (_, c) in s.blocks_of(&v[1]).unwrap() {
            let constant = c.outcomes.iter().all(|&r| v[0].value(r) == v[0].value(c.outcomes[0]));
            prop_assert_eq!(history(&s, &c, &v[0]).is_empty(), constant);
        }
    }

    #[test]
    fn history_lies_within_the_support((s, v) in model(1), mask in any::<u64>()) {
        let support = IndexSet::from_bits(mask) & s.all();
        let uj = s.subset_var(support).unwrap();
        prop_assert_eq!(history(&s, &s.full_block(), &uj), support);
        prop_assert!(history(&s, &s.full_block(), &v[0]).is_subset(s.all()));
    }

    #[test]
    fn conditioning_on_everything_empties_histories((s, v) in model(1)) {
        let all = s.subset_var(s.all()).unwrap();
        for (_, c) in s.blocks_of(&all).unwrap() {
            prop_assert!(history(&s, &c, &v[0]).is_empty());
        }
    }

    #[test]
    fn structural_independence_is_symmetric((s, v) in model(3)) {
        let a = structurally_independent(&s, &v[0], &v[1], &v[2]).unwrap().independent;
        let b = structurally_independent(&s, &v[1], &v[0], &v[2]).unwrap().independent;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn structural_independence_implies_ci((s, v) in model(3), seed in any::<u64>()) {
        prop_assume!(structurally_independent(&s, &v[0], &v[1], &v[2]).unwrap().independent);
        let p = ProductDistribution::sample(&s, seed);
        prop_assert!(is_cond_independent(&s, &p, &v[0], &v[1], &v[2]).unwrap().holds);
        prop_assert!(common::cond_independent(p.per_factor(), &v[0].table, &v[1].table, &v[2].table));
    }

    #[test]
    fn ci_check_matches_oracle((s, v) in model(3), seed in any::<u64>()) {
        let p = ProductDistribution::sample(&s, seed);
        prop_assert_eq!(
            is_cond_independent(&s, &p, &v[0], &v[1], &v[2]).unwrap().holds,
            common::cond_independent(p.per_factor(), &v[0].table, &v[1].table, &v[2].table)
        );
    }

    #[test]
    fn conditional_rows_sum_to_one((s, v) in model(2), seed in any::<u64>()) {
        let p = ProductDistribution::sample(&s, seed);
        prop_assert!(p.is_positive());
        let t = cond_table(&s, &p, &v[0], &v[1]).unwrap();
        for zv in s.blocks_of(&v[1]).unwrap().keys() {
            let total: facthist::Rational = t.range((*zv, 0)..=(*zv, u32::MAX)).map(|(_, q)| q.clone()).sum();
            prop_assert!(total.is_one());
        }
    }
}
