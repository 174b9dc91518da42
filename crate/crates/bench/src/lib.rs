//! Fixtures shared by the benchmarks.

use facthist::{FactoredSpace, IndexSet, RandomVariable};

/// `n` binary factors and the parity of all of them, the worst case for
/// subset enumeration: the history is the full index set.
pub fn parity(n: usize) -> (FactoredSpace, RandomVariable) {
    let s = FactoredSpace::from_sizes(&vec![2; n]).unwrap();
    let table = (0..s.outcome_count())
        .map(|r| (0..n).map(|i| s.digit(r, i)).sum::<usize>() as u32 % 2)
        .collect();
    (s, RandomVariable::from_table("parity", 2, table).unwrap())
}

/// Parity of the first `k` of `n` binary factors.
pub fn partial_parity(n: usize, k: usize) -> (FactoredSpace, RandomVariable) {
    let s = FactoredSpace::from_sizes(&vec![2; n]).unwrap();
    let j: IndexSet = (0..k).collect();
    let table = (0..s.outcome_count())
        .map(|r| j.iter().map(|i| s.digit(r, i)).sum::<usize>() as u32 % 2)
        .collect();
    (s, RandomVariable::from_table("parity", 2, table).unwrap())
}
