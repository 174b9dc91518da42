//! Finite factored spaces, outcomes, index sets and random variables.
//!
//! The outcome space is always the full product of the factor domains and
//! the factors are the coordinate projections. Outcomes are ranked in
//! mixed radix with the last factor varying fastest, so a variable is a
//! dense table indexed by outcome rank.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound on the number of factors (width of [`IndexSet`]).
pub const MAX_FACTORS_HARD: usize = 64;

/// Size caps applied when constructing a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_outcomes: usize,
    pub max_factors: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_outcomes: 1_000_000,
            max_factors: 20,
        }
    }
}

/// Set of factor ids, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_FACTORS_HARD);
        if n == 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_FACTORS_HARD);
        IndexSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_FACTORS_HARD && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < MAX_FACTORS_HARD);
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        if i < MAX_FACTORS_HARD {
            self.0 &= !(1 << i);
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    /// `I \ self` for a space with `n` factors.
    pub fn complement(self, n: usize) -> IndexSet {
        IndexSet(!self.0 & IndexSet::full(n).0)
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, in increasing order of bit pattern.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(IndexSet(cur))
        })
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = IndexSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl BitOr for IndexSet {
    type Output = IndexSet;
    fn bitor(self, rhs: IndexSet) -> IndexSet {
        self.union(rhs)
    }
}

impl BitAnd for IndexSet {
    type Output = IndexSet;
    fn bitand(self, rhs: IndexSet) -> IndexSet {
        self.intersection(rhs)
    }
}

impl Sub for IndexSet {
    type Output = IndexSet;
    fn sub(self, rhs: IndexSet) -> IndexSet {
        self.difference(rhs)
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = ids.iter().find(|&&i| i >= MAX_FACTORS_HARD) {
            return Err(serde::de::Error::custom(format!("factor id {bad} too large")));
        }
        Ok(ids.into_iter().collect())
    }
}

/// One coordinate of the product space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub domain: Vec<String>,
}

impl Factor {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Self {
        Factor {
            name: name.into(),
            domain,
        }
    }

    /// Factor with value labels `"0"`, `"1"`, ...
    pub fn with_size(name: impl Into<String>, size: usize) -> Self {
        Factor::new(name, (0..size).map(|v| v.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }
}

/// A point of the space: one domain index per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredSpace {
    factors: Vec<Factor>,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    outcome_count: usize,
}

impl FactoredSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        Self::with_limits(factors, &Limits::default())
    }

    pub fn with_limits(factors: Vec<Factor>, limits: &Limits) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one factor".into()));
        }
        let max_factors = limits.max_factors.min(MAX_FACTORS_HARD);
        if factors.len() > max_factors {
            return Err(Error::SpaceTooLarge(format!(
                "{} factors exceeds the cap of {max_factors}",
                factors.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &factors {
            if f.domain.is_empty() {
                return Err(Error::InvalidSpace(format!("factor `{}` has an empty domain", f.name)));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate factor name `{}`", f.name)));
            }
        }
        let sizes: Vec<usize> = factors.iter().map(Factor::size).collect();
        let mut outcome_count = 1usize;
        for &s in &sizes {
            outcome_count = outcome_count
                .checked_mul(s)
                .filter(|&c| c <= limits.max_outcomes)
                .ok_or_else(|| {
                    Error::SpaceTooLarge(format!(
                        "outcome count exceeds the cap of {}",
                        limits.max_outcomes
                    ))
                })?;
        }
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(FactoredSpace {
            factors,
            sizes,
            strides,
            outcome_count,
        })
    }

    /// Space with factors named `u0, u1, ...` and numeric value labels.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        Self::new(
            sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| Factor::with_size(format!("u{i}"), s))
                .collect(),
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> Result<&Factor> {
        self.factors.get(i).ok_or(Error::UnknownFactor(i))
    }

    pub fn factor_id(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    /// The full index set `I`.
    pub fn all(&self) -> IndexSet {
        IndexSet::full(self.num_factors())
    }

    pub fn complement(&self, j: IndexSet) -> IndexSet {
        j.complement(self.num_factors())
    }

    pub fn rank(&self, o: &Outcome) -> Result<usize> {
        if o.0.len() != self.sizes.len() {
            return Err(Error::InvalidOutcome(format!(
                "expected {} coordinates, got {}",
                self.sizes.len(),
                o.0.len()
            )));
        }
        let mut r = 0;
        for (i, (&v, &s)) in o.0.iter().zip(&self.sizes).enumerate() {
            if v >= s {
                return Err(Error::InvalidOutcome(format!(
                    "coordinate {i} is {v} but factor `{}` has {s} values",
                    self.factors[i].name
                )));
            }
            r = r * s + v;
        }
        Ok(r)
    }

    pub fn unrank(&self, r: usize) -> Result<Outcome> {
        if r >= self.outcome_count {
            return Err(Error::InvalidRank {
                rank: r,
                count: self.outcome_count,
            });
        }
        Ok(Outcome(
            (0..self.sizes.len()).map(|i| self.digit(r, i)).collect(),
        ))
    }

    /// Coordinate `i` of the outcome with rank `r`.
    #[inline]
    pub fn digit(&self, r: usize, i: usize) -> usize {
        (r / self.strides[i]) % self.sizes[i]
    }

    /// Rank of the outcome that agrees with `r` on `j` and is zero elsewhere.
    ///
    /// Two outcomes have equal `j`-projections iff their keys are equal, and
    /// `r == project(r, j) + project(r, complement(j))`.
    #[inline]
    pub fn project(&self, r: usize, j: IndexSet) -> usize {
        j.iter().map(|i| self.digit(r, i) * self.strides[i]).sum()
    }

    pub fn check_var(&self, x: &RandomVariable) -> Result<()> {
        if x.table.len() != self.outcome_count {
            return Err(Error::SpaceMismatch {
                name: x.name.clone(),
                reason: format!(
                    "table has {} entries, space has {} outcomes",
                    x.table.len(),
                    self.outcome_count
                ),
            });
        }
        Ok(())
    }

    /// The projection `U_i` as a random variable.
    pub fn factor_var(&self, i: usize) -> Result<RandomVariable> {
        let f = self.factor(i)?;
        let table = (0..self.outcome_count)
            .map(|r| self.digit(r, i) as u32)
            .collect();
        Ok(RandomVariable {
            name: f.name.clone(),
            codomain: f.domain.clone(),
            table,
        })
    }

    /// The tuple `U_J`; its codomain is the set of attained `J`-projections.
    /// `U_∅` is the trivial variable.
    pub fn subset_var(&self, j: IndexSet) -> Result<RandomVariable> {
        if let Some(bad) = j.iter().find(|&i| i >= self.num_factors()) {
            return Err(Error::UnknownFactor(bad));
        }
        if j.is_empty() {
            return Ok(self.trivial_var());
        }
        let mut keys: Vec<usize> = (0..self.outcome_count).map(|r| self.project(r, j)).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let index: HashMap<usize, u32> = distinct
            .iter()
            .enumerate()
            .map(|(k, &key)| (key, k as u32))
            .collect();
        let codomain = distinct
            .iter()
            .map(|&key| {
                let labels: Vec<&str> = j
                    .iter()
                    .map(|i| self.factors[i].domain[self.digit(key, i)].as_str())
                    .collect();
                format!("({})", labels.join(","))
            })
            .collect();
        let table = keys.drain(..).map(|k| index[&k]).collect();
        let name = format!(
            "U{{{}}}",
            j.iter()
                .map(|i| self.factors[i].name.as_str())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(RandomVariable {
            name,
            codomain,
            table,
        })
    }

    /// Constant variable with the single value `•`.
    pub fn trivial_var(&self) -> RandomVariable {
        RandomVariable {
            name: "trivial".into(),
            codomain: vec!["•".into()],
            table: vec![0; self.outcome_count],
        }
    }

    /// The tuple `(x, y)`. Codomain is the attained pairs, ordered by
    /// `(x value, y value)`.
    pub fn pair_var(&self, x: &RandomVariable, y: &RandomVariable) -> Result<RandomVariable> {
        self.check_var(x)?;
        self.check_var(y)?;
        let mut pairs: Vec<(u32, u32)> = x.table.iter().copied().zip(y.table.iter().copied()).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let index: HashMap<(u32, u32), u32> = pairs
            .iter()
            .enumerate()
            .map(|(k, &p)| (p, k as u32))
            .collect();
        let codomain = pairs
            .iter()
            .map(|&(a, b)| format!("({},{})", x.codomain[a as usize], y.codomain[b as usize]))
            .collect();
        let table = x
            .table
            .iter()
            .zip(&y.table)
            .map(|(&a, &b)| index[&(a, b)])
            .collect();
        Ok(RandomVariable {
            name: format!("({},{})", x.name, y.name),
            codomain,
            table,
        })
    }

    /// Left fold of [`pair_var`](Self::pair_var); the empty tuple is trivial.
    pub fn tuple_var(&self, vars: &[&RandomVariable]) -> Result<RandomVariable> {
        match vars {
            [] => Ok(self.trivial_var()),
            [only] => {
                self.check_var(only)?;
                Ok((*only).clone())
            }
            [first, rest @ ..] => {
                let mut acc = (*first).clone();
                for v in rest {
                    acc = self.pair_var(&acc, v)?;
                }
                Ok(acc)
            }
        }
    }

    /// Partition of the outcomes into the level sets `{z = v}`, keyed by the
    /// attained values of `z`.
    pub fn blocks_of(&self, z: &RandomVariable) -> Result<BTreeMap<u32, Block>> {
        self.check_var(z)?;
        let mut blocks: BTreeMap<u32, Block> = BTreeMap::new();
        for (r, &v) in z.table.iter().enumerate() {
            blocks
                .entry(v)
                .or_insert_with(|| Block {
                    label: v,
                    outcomes: Vec::new(),
                })
                .outcomes
                .push(r);
        }
        Ok(blocks)
    }

    /// The whole space as a single block.
    pub fn full_block(&self) -> Block {
        Block {
            label: 0,
            outcomes: (0..self.outcome_count).collect(),
        }
    }
}

/// Random variable with finite codomain, stored as a dense table over
/// outcome ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomVariable {
    pub name: String,
    pub codomain: Vec<String>,
    pub table: Vec<u32>,
}

impl RandomVariable {
    pub fn new(name: impl Into<String>, codomain: Vec<String>, table: Vec<u32>) -> Result<Self> {
        let name = name.into();
        if codomain.is_empty() {
            return Err(Error::InvalidVariable {
                name,
                reason: "empty codomain".into(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v as usize >= codomain.len()) {
            return Err(Error::InvalidVariable {
                name,
                reason: format!("table entry {bad} outside codomain of size {}", codomain.len()),
            });
        }
        Ok(RandomVariable {
            name,
            codomain,
            table,
        })
    }

    /// Variable with codomain labels `"0"`, `"1"`, ...
    pub fn from_table(name: impl Into<String>, codomain_size: usize, table: Vec<u32>) -> Result<Self> {
        Self::new(name, (0..codomain_size).map(|v| v.to_string()).collect(), table)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn value(&self, rank: usize) -> u32 {
        self.table[rank]
    }

    pub fn label(&self, value: u32) -> &str {
        &self.codomain[value as usize]
    }
}

/// A level set `{z = label}`; outcome ranks in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub label: u32,
    pub outcomes: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}
