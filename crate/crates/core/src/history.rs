//! Generation, the rectangle test, histories and structural independence.
//!
//! For a block `C` (a level set of the conditioning variable) an index set
//! `J` *generates* `x` given `C` when `x` restricted to `C` is a function of
//! the `J`-coordinates and `C` factorizes as the product of its `J`- and
//! `I \ J`-projections. The history `H(x|C)` is the smallest generating set.
//! Generating sets are closed under intersection, so the smallest one is
//! unique and equals any generating set of minimum cardinality.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Block, FactoredSpace, IndexSet, RandomVariable};

fn distinct_count(mut keys: Vec<usize>) -> usize {
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Whether `C = proj_J(C) × proj_{I\J}(C)`.
///
/// `C` always embeds into the product of its projections, so comparing
/// cardinalities is enough.
pub fn is_rectangle(space: &FactoredSpace, c: &Block, j: IndexSet) -> bool {
    let jc = space.complement(j);
    if j.is_empty() || jc.is_empty() {
        return true;
    }
    let left = distinct_count(c.outcomes.iter().map(|&r| space.project(r, j)).collect());
    let right = distinct_count(c.outcomes.iter().map(|&r| space.project(r, jc)).collect());
    left.checked_mul(right) == Some(c.len())
}

/// Whether `x` restricted to `c` is a function of the `j`-coordinates.
pub fn determines(space: &FactoredSpace, c: &Block, j: IndexSet, x: &RandomVariable) -> bool {
    let mut seen: HashMap<usize, u32> = HashMap::with_capacity(c.len());
    for &r in &c.outcomes {
        let v = x.value(r);
        match seen.insert(space.project(r, j), v) {
            Some(prev) if prev != v => return false,
            _ => {}
        }
    }
    true
}

pub fn generates(space: &FactoredSpace, c: &Block, j: IndexSet, x: &RandomVariable) -> bool {
    determines(space, c, j, x) && is_rectangle(space, c, j)
}

/// Subsets of `{0..n}` with exactly `k` elements, in increasing bit order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = IndexSet> {
    let limit: u128 = 1u128 << n;
    let mut cur: Option<u128> = if k > n {
        None
    } else {
        Some((1u128 << k) - 1)
    };
    std::iter::from_fn(move || {
        let c = cur?;
        if c >= limit {
            cur = None;
            return None;
        }
        cur = if c == 0 {
            None
        } else {
            // Gosper's hack
            let low = c & c.wrapping_neg();
            let ripple = c + low;
            Some((((ripple ^ c) >> 2) / low) | ripple)
        };
        Some(IndexSet::from_bits(c as u64))
    })
}

/// `H(x|c)`: the first generating set met in order of increasing size.
///
/// A block with a single outcome is generated by every set, so its history
/// is empty. `I` always generates, so the search terminates.
pub fn history(space: &FactoredSpace, c: &Block, x: &RandomVariable) -> IndexSet {
    let n = space.num_factors();
    (0..=n)
        .flat_map(|k| subsets_of_size(n, k))
        .find(|&j| generates(space, c, j, x))
        .expect("the full index set always generates")
}

/// Atom decomposition of the rectangle sets of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atoms {
    /// Pairwise disjoint, ordered by smallest element.
    pub atoms: Vec<IndexSet>,
    /// Factors that are constant on the block.
    pub trivial: IndexSet,
}

impl Atoms {
    /// Whether `j` is a union of atoms plus some trivial factors, i.e.
    /// whether the block is a rectangle with respect to `j`.
    pub fn is_rectangle_set(&self, j: IndexSet) -> bool {
        self.atoms
            .iter()
            .all(|&a| a.is_subset(j) || a.is_disjoint(j))
    }
}

/// The atoms are the histories `H(U_i|c)` of the factors that are not
/// constant on `c`; together with the constant factors they partition `I`.
pub fn disintegration_atoms(space: &FactoredSpace, c: &Block) -> Result<Atoms> {
    if c.is_empty() {
        return Err(Error::InvalidQuery("empty block".into()));
    }
    let mut trivial = IndexSet::EMPTY;
    let mut atoms: Vec<IndexSet> = Vec::new();
    let mut covered = IndexSet::EMPTY;
    for i in 0..space.num_factors() {
        let first = space.digit(c.outcomes[0], i);
        if c.outcomes.iter().all(|&r| space.digit(r, i) == first) {
            trivial.insert(i);
            continue;
        }
        if covered.contains(i) {
            continue;
        }
        let h = history(space, c, &space.factor_var(i)?);
        if !h.contains(i) || !h.is_disjoint(covered) || !h.is_disjoint(trivial) {
            return Err(Error::InvariantViolation(format!(
                "atom {h} of factor {i} overlaps earlier atoms {covered} or trivial part {trivial}"
            )));
        }
        covered = covered | h;
        atoms.push(h);
    }
    if covered | trivial != space.all() {
        return Err(Error::InvariantViolation(format!(
            "atoms {covered} and trivial part {trivial} do not cover all factors"
        )));
    }
    Ok(Atoms { atoms, trivial })
}

/// `H(x|c)` from the atom decomposition: the union of the atoms `B` for
/// which `I \ B` does not determine `x`.
pub fn history_via_atoms(space: &FactoredSpace, c: &Block, x: &RandomVariable) -> Result<IndexSet> {
    let atoms = disintegration_atoms(space, c)?;
    Ok(atoms
        .atoms
        .iter()
        .filter(|&&b| !determines(space, c, space.complement(b), x))
        .fold(IndexSet::EMPTY, |acc, &b| acc | b))
}

/// `z value -> H(x | z = value)` for every attained value of `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalHistory {
    pub per_block: BTreeMap<u32, IndexSet>,
}

impl ConditionalHistory {
    pub fn get(&self, z: u32) -> Option<IndexSet> {
        self.per_block.get(&z).copied()
    }
}

pub fn conditional_history(
    space: &FactoredSpace,
    x: &RandomVariable,
    z: &RandomVariable,
) -> Result<ConditionalHistory> {
    space.check_var(x)?;
    let per_block = space
        .blocks_of(z)?
        .into_iter()
        .map(|(v, c)| (v, history(space, &c, x)))
        .collect();
    Ok(ConditionalHistory { per_block })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceVerdict {
    pub independent: bool,
    /// Non-empty history intersections, keyed by conditioning value.
    pub overlaps: BTreeMap<u32, IndexSet>,
}

/// `x ⊥ y | z`: the conditional histories are disjoint on every block.
pub fn structurally_independent(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
) -> Result<IndependenceVerdict> {
    space.check_var(x)?;
    space.check_var(y)?;
    let mut overlaps = BTreeMap::new();
    for (v, c) in space.blocks_of(z)? {
        let both = history(space, &c, x) & history(space, &c, y);
        if !both.is_empty() {
            overlaps.insert(v, both);
        }
    }
    Ok(IndependenceVerdict {
        independent: overlaps.is_empty(),
        overlaps,
    })
}

/// Structural time: `H(x|C) ⊆ H(y|C)` on every block of `z`.
pub fn structural_time_leq(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
) -> Result<bool> {
    space.check_var(x)?;
    space.check_var(y)?;
    Ok(space
        .blocks_of(z)?
        .values()
        .all(|c| history(space, c, x).is_subset(history(space, c, y))))
}
