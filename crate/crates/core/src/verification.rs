//! Seeded generators and property suites.
//!
//! Every suite draws its instances from a [`SuiteConfig`] seed. Instance `k`
//! of a suite owns an RNG stream derived from `(seed, suite, k)`, so reports
//! are identical regardless of how instances are scheduled across threads.
//! Laws are tallied per check; a failure carries enough state (space file,
//! variables, seeds) to replay it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::{all_single_queries, dsep_structural_equivalence, structural_time_vs_ancestry, Dag, Node};
use crate::distributions::{
    cond_table, derive_seed, find_witness, is_jointly_cond_independent, perturb_factor,
    product_difference_identity, sample_vector, verify_soundness, ProductDistribution,
};
use crate::error::{Error, Result};
use crate::formats::{DagFile, DistributionFile, SpaceFile};
use crate::history::{
    determines, disintegration_atoms, generates, history, history_via_atoms, is_rectangle,
    structurally_independent,
};
use crate::space::{Block, FactoredSpace, IndexSet, Limits, RandomVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub iterations: usize,
    pub max_factors: usize,
    pub max_domain: usize,
    /// Sampled distributions per soundness check.
    pub sample_count: usize,
    /// Tries per witness search.
    pub witness_budget: usize,
    /// Sampled perturbation pairs per factor in the duality checks.
    pub perturbation_budget: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            iterations: 100,
            max_factors: 4,
            max_domain: 3,
            sample_count: 50,
            witness_budget: 64,
            perturbation_budget: 16,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let limits = Limits::default();
        if self.max_factors < 2 || self.max_factors > limits.max_factors {
            return Err(Error::InvalidQuery(format!(
                "max_factors must be in 2..={}",
                limits.max_factors
            )));
        }
        if self.max_domain < 2 {
            return Err(Error::InvalidQuery("max_domain must be at least 2".into()));
        }
        let worst = (self.max_domain as u128).checked_pow(self.max_factors as u32);
        if worst.is_none_or(|w| w > limits.max_outcomes as u128) {
            return Err(Error::SpaceTooLarge(format!(
                "{}^{} outcomes exceeds the cap of {}",
                self.max_domain, self.max_factors, limits.max_outcomes
            )));
        }
        Ok(())
    }
}

/// Independent RNG streams per purpose.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Space = 1,
    Variable = 2,
    Instance = 3,
    Dag = 4,
    Check = 5,
}

fn rng_for(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, stream as u64), index))
}

/// Space with `2..=max_factors` factors of sizes `2..=max_domain`.
pub fn gen_random_space(cfg: &SuiteConfig, index: u64) -> FactoredSpace {
    let mut rng = rng_for(cfg.seed, Stream::Space, index);
    space_from_rng(&mut rng, cfg)
}

fn space_from_rng(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> FactoredSpace {
    let n = rng.random_range(2..=cfg.max_factors.max(2));
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=cfg.max_domain.max(2))).collect();
    FactoredSpace::from_sizes(&sizes).expect("config bounds respect the caps")
}

/// Variable with codomain size `1..=4` and a uniformly random table.
pub fn gen_random_variable(space: &FactoredSpace, cfg: &SuiteConfig, index: u64) -> RandomVariable {
    let mut rng = rng_for(cfg.seed, Stream::Variable, index);
    uniform_variable(&mut rng, space, "v")
}

fn uniform_variable(rng: &mut impl Rng, space: &FactoredSpace, name: &str) -> RandomVariable {
    let k = rng.random_range(1..=4u32);
    let table = (0..space.outcome_count()).map(|_| rng.random_range(0..k)).collect();
    RandomVariable::from_table(name, k as usize, table).expect("entries below codomain size")
}

/// A random function of the `support` coordinates, codomain size `1..=4`.
pub fn supported_variable(rng: &mut impl Rng, space: &FactoredSpace, support: IndexSet, name: &str) -> RandomVariable {
    let k = rng.random_range(1..=4u32);
    let mut values: BTreeMap<usize, u32> = BTreeMap::new();
    let table = (0..space.outcome_count())
        .map(|r| {
            *values
                .entry(space.project(r, support))
                .or_insert_with(|| rng.random_range(0..k))
        })
        .collect();
    RandomVariable::from_table(name, k as usize, table).expect("entries below codomain size")
}

/// Uniform tables one time in three, otherwise a random function of a
/// random subset of the factors.
fn mixed_variable(rng: &mut impl Rng, space: &FactoredSpace, name: &str) -> RandomVariable {
    if rng.random_range(0..3) == 0 {
        uniform_variable(rng, space, name)
    } else {
        let support = (0..space.num_factors()).filter(|_| rng.random_bool(0.5)).collect();
        supported_variable(rng, space, support, name)
    }
}

/// A random space with four variables `x, y, z, w`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub seed: u64,
    pub space: FactoredSpace,
    pub x: RandomVariable,
    pub y: RandomVariable,
    pub z: RandomVariable,
    pub w: RandomVariable,
}

impl Instance {
    pub fn space_file(&self) -> SpaceFile {
        SpaceFile::from_parts(&self.space, [&self.x, &self.y, &self.z, &self.w])
    }
}

pub fn gen_instance(cfg: &SuiteConfig, salt: u64, index: usize) -> Instance {
    let seed = derive_seed(derive_seed(cfg.seed, Stream::Instance as u64 ^ salt << 8), index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = space_from_rng(&mut rng, cfg);
    let x = mixed_variable(&mut rng, &space, "x");
    let y = mixed_variable(&mut rng, &space, "y");
    let z = mixed_variable(&mut rng, &space, "z");
    let w = mixed_variable(&mut rng, &space, "w");
    Instance {
        index,
        seed,
        space,
        x,
        y,
        z,
        w,
    }
}

/// DAG with `2..=max_nodes` nodes, every node in-degree at most
/// `max_indegree`, all domains `domain`. Nodes are named `A, B, ...`.
pub fn gen_random_dag(seed: u64, index: u64, max_nodes: usize, max_indegree: usize, domain: usize) -> Dag {
    let mut rng = rng_for(seed, Stream::Dag, index);
    let n = rng.random_range(2..=max_nodes.clamp(2, 26));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for pos in 1..n {
        let k = rng.random_range(0..=max_indegree.min(pos));
        let mut earlier = order[..pos].to_vec();
        earlier.shuffle(&mut rng);
        edges.extend(earlier[..k].iter().map(|&p| (p, order[pos])));
    }
    let nodes = (0..n)
        .map(|v| Node {
            name: char::from(b'A' + v as u8).to_string(),
            domain,
        })
        .collect();
    Dag::new(nodes, &edges).expect("edges follow a topological order")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawTally {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    /// Passing checks whose premise held (implication laws only).
    pub nonvacuous: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub law: String,
    pub instance: usize,
    pub seed: u64,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<SpaceFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dag: Option<DagFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub laws: BTreeMap<String, LawTally>,
    /// Recorded but never asserted.
    pub observations: BTreeMap<String, usize>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    fn tally(&mut self, law: &str) -> &mut LawTally {
        self.laws.entry(law.to_string()).or_default()
    }

    fn pass(&mut self, law: &str) {
        self.tally(law).passed += 1;
    }

    fn inconclusive(&mut self, law: &str) {
        self.tally(law).inconclusive += 1;
    }

    /// Records an implication check.
    fn implication(&mut self, law: &str, premise: bool, conclusion: bool, cx: impl FnOnce() -> Counterexample) {
        if premise && !conclusion {
            self.fail(cx());
        } else {
            let t = self.tally(law);
            t.passed += 1;
            if premise {
                t.nonvacuous += 1;
            }
        }
    }

    fn check(&mut self, law: &str, ok: bool, cx: impl FnOnce() -> Counterexample) {
        if ok {
            self.pass(law);
        } else {
            self.fail(cx());
        }
    }

    fn fail(&mut self, cx: Counterexample) {
        self.tally(&cx.law).failed += 1;
        self.counterexamples.push(cx);
    }

    fn observe(&mut self, key: &str) {
        *self.observations.entry(key.to_string()).or_default() += 1;
    }

    pub fn law(&self, name: &str) -> LawTally {
        self.laws.get(name).copied().unwrap_or_default()
    }

    pub fn failures(&self) -> usize {
        self.laws.values().map(|t| t.failed).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.instances += other.instances;
        for (k, t) in other.laws {
            let mine = self.tally(&k);
            mine.passed += t.passed;
            mine.failed += t.failed;
            mine.inconclusive += t.inconclusive;
            mine.nonvacuous += t.nonvacuous;
        }
        for (k, n) in other.observations {
            *self.observations.entry(k).or_default() += n;
        }
        self.counterexamples.extend(other.counterexamples);
    }

    fn for_instance(mut self, index: usize, seed: u64) -> Self {
        for cx in &mut self.counterexamples {
            cx.instance = index;
            cx.seed = seed;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn counterexample(law: &str, detail: String, space: &FactoredSpace, vars: &[&RandomVariable]) -> Counterexample {
    Counterexample {
        law: law.to_string(),
        instance: 0,
        seed: 0,
        detail,
        model: Some(SpaceFile::from_parts(space, vars.iter().copied())),
        dag: None,
        distribution: None,
    }
}

/// Which of the five axioms held as implications on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigraphoidCheck {
    pub symmetry: bool,
    pub decomposition: bool,
    pub weak_union: bool,
    pub contraction: bool,
    pub composition: bool,
    /// Premise held, per axiom in the order above.
    pub premises: [bool; 5],
}

impl SemigraphoidCheck {
    pub fn all_hold(&self) -> bool {
        self.symmetry && self.decomposition && self.weak_union && self.contraction && self.composition
    }
}

/// Symmetry, decomposition, weak union, contraction and composition as
/// implications between structural verdicts.
pub fn check_semigraphoid(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    w: &RandomVariable,
) -> Result<SemigraphoidCheck> {
    let indep = |a: &RandomVariable, b: &RandomVariable, c: &RandomVariable| -> Result<bool> {
        Ok(structurally_independent(space, a, b, c)?.independent)
    };
    let yw = space.pair_var(y, w)?;
    let zw = space.pair_var(z, w)?;
    let zy = space.pair_var(z, y)?;

    let x_y_z = indep(x, y, z)?;
    let y_x_z = indep(y, x, z)?;
    let x_yw_z = indep(x, &yw, z)?;
    let x_y_zw = indep(x, y, &zw)?;
    let x_w_zy = indep(x, w, &zy)?;
    let x_w_z = indep(x, w, z)?;

    let imp = |p: bool, q: bool| !p || q;
    Ok(SemigraphoidCheck {
        symmetry: x_y_z == y_x_z,
        decomposition: imp(x_yw_z, x_y_z),
        weak_union: imp(x_yw_z, x_y_zw),
        contraction: imp(x_y_z && x_w_zy, x_yw_z),
        composition: imp(x_y_z && x_w_z, x_yw_z),
        premises: [x_y_z || y_x_z, x_yw_z, x_yw_z, x_y_z && x_w_zy, x_y_z && x_w_z],
    })
}

fn semigraphoid_report(inst: &Instance) -> Result<SuiteReport> {
    let (s, x, y, z, w) = (&inst.space, &inst.x, &inst.y, &inst.z, &inst.w);
    let c = check_semigraphoid(s, x, y, z, w)?;
    let mut r = SuiteReport::default();
    let laws = [
        ("semigraphoid.symmetry", c.symmetry),
        ("semigraphoid.decomposition", c.decomposition),
        ("semigraphoid.weak_union", c.weak_union),
        ("semigraphoid.contraction", c.contraction),
        ("semigraphoid.composition", c.composition),
    ];
    for ((law, holds), premise) in laws.into_iter().zip(c.premises) {
        r.implication(law, premise, holds, || {
            counterexample(law, "implication failed".into(), s, &[x, y, z, w])
        });
    }
    Ok(r)
}

fn is_constant_on(c: &Block, x: &RandomVariable) -> bool {
    let first = x.value(c.outcomes[0]);
    c.outcomes.iter().all(|&r| x.value(r) == first)
}

/// History laws on every block of `z`: emptiness, compositionality,
/// monotonicity, removal, null and atom laws, closure of generating and
/// rectangle sets, the atom characterization and the atom fast path.
/// `seed` drives the random index sets and post-compositions.
pub fn check_history_laws(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    seed: u64,
) -> Result<SuiteReport> {
    let mut rng = rng_for(seed, Stream::Check, 0);
    let mut r = SuiteReport::default();
    let n = space.num_factors();
    let all = space.all();
    let xy = space.pair_var(x, y)?;
    let yz = space.pair_var(y, z)?;
    // x' = f(y, z) for a random f
    let k = rng.random_range(1..=4u32);
    let f: Vec<u32> = (0..yz.codomain.len()).map(|_| rng.random_range(0..k)).collect();
    let fyz = RandomVariable::from_table("f(y,z)", k as usize, yz.table.iter().map(|&v| f[v as usize]).collect())?;
    let cx = |law: &str, detail: String| counterexample(law, detail, space, &[x, y, z]);

    for (zv, c) in space.blocks_of(z)? {
        let hx = history(space, &c, x);
        let hy = history(space, &c, y);

        let hz = history(space, &c, z);
        r.check("history.self_empty", hz.is_empty(), || {
            cx("history.self_empty", format!("H(z|z={zv}) = {hz}"))
        });

        let hxy = history(space, &c, &xy);
        r.check("history.compositionality", hxy == hx | hy, || {
            cx("history.compositionality", format!("block {zv}: H((x,y)) = {hxy}, H(x) ∪ H(y) = {}", hx | hy))
        });

        let hf = history(space, &c, &fyz);
        r.check("history.monotonicity", hf.is_subset(hy), || {
            cx("history.monotonicity", format!("block {zv}: H(f(y,z)) = {hf} ⊄ H(y) = {hy}"))
        });

        let constant = is_constant_on(&c, x);
        r.check("history.emptiness", hx.is_empty() == constant, || {
            cx("history.emptiness", format!("block {zv}: H(x) = {hx}, constant = {constant}"))
        });

        let atoms = disintegration_atoms(space, &c)?;

        // random J, and J as a union of random atoms plus trivial factors
        let j_rand = IndexSet::from_bits(rng.random::<u64>()) & all;
        let j_atoms = atoms
            .atoms
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .fold(IndexSet::EMPTY, |acc, &a| acc | a)
            | (IndexSet::from_bits(rng.random::<u64>()) & atoms.trivial);
        for j in [j_rand, j_atoms] {
            let uj = space.subset_var(j)?;
            let huj = history(space, &c, &uj);

            let rest = j - huj;
            let h_rest = history(space, &c, &space.subset_var(rest)?);
            r.check("history.removal", h_rest.is_empty(), || {
                cx("history.removal", format!("block {zv}: J = {j}, H(U_J) = {huj}, H(U_(J\\H)) = {h_rest}"))
            });

            for (jj, hjj) in [(j, huj), (rest, h_rest)] {
                r.implication("history.null", hjj.is_empty(), (hx & jj).is_empty(), || {
                    cx("history.null", format!("block {zv}: H(U_J) empty for J = {jj} but H(x) = {hx}"))
                });
            }

            let rect = is_rectangle(space, &c, j);
            let expected = j - atoms.trivial;
            r.implication("history.atom", rect, huj == expected, || {
                cx("history.atom", format!("block {zv}: J = {j}, H(U_J) = {huj}, expected {expected}"))
            });
        }

        let fast = history_via_atoms(space, &c, x)?;
        r.check("history.fast_path", fast == hx, || {
            cx("history.fast_path", format!("block {zv}: enumeration {hx}, atoms {fast}"))
        });

        if n <= 8 {
            let subsets: Vec<IndexSet> = all.subsets().collect();
            let gens: Vec<IndexSet> = subsets.iter().copied().filter(|&j| generates(space, &c, j, x)).collect();
            let meet = gens.iter().fold(all, |acc, &j| acc & j);
            let min_len = gens.iter().map(|j| j.len()).min().unwrap_or(0);
            let min_is_h = gens.iter().filter(|j| j.len() == min_len).all(|&j| j == hx);
            let closed = gens
                .iter()
                .all(|&a| gens.iter().all(|&b| generates(space, &c, a & b, x)));
            r.check("closure.generating_intersection", closed && meet == hx && min_is_h, || {
                cx(
                    "closure.generating_intersection",
                    format!("block {zv}: intersection closed = {closed}, meet = {meet}, H = {hx}, minimal-is-H = {min_is_h}"),
                )
            });

            let rects: Vec<IndexSet> = subsets.iter().copied().filter(|&j| is_rectangle(space, &c, j)).collect();
            let is_rect = |j: IndexSet| rects.contains(&j);
            let field = rects.iter().all(|&a| {
                is_rect(space.complement(a)) && rects.iter().all(|&b| is_rect(a & b) && is_rect(a | b))
            });
            r.check("closure.rectangle_field", field, || {
                cx("closure.rectangle_field", format!("block {zv}: rectangle sets {rects:?} not a field"))
            });

            let agrees = subsets.iter().all(|&j| is_rect(j) == atoms.is_rectangle_set(j));
            r.check("atoms.characterization", agrees, || {
                cx("atoms.characterization", format!("block {zv}: atoms {:?}, trivial {}", atoms.atoms, atoms.trivial))
            });
        }
    }
    Ok(r)
}

fn conditional_rows_equal(
    a: &BTreeMap<(u32, u32), crate::Rational>,
    b: &BTreeMap<(u32, u32), crate::Rational>,
    zv: u32,
) -> bool {
    a.range((zv, 0)..=(zv, u32::MAX))
        .all(|(k, v)| b.get(k) == Some(v))
}

fn random_pair(space: &FactoredSpace, rng: &mut ChaCha8Rng, i: usize) -> Result<crate::PerturbationPair> {
    let base = ProductDistribution::sample(space, rng.random());
    let v = sample_vector(rng, space.sizes()[i]);
    perturb_factor(&base, i, v)
}

/// Irrelevance: for factors outside `H(x|C)`, sampled single-factor
/// perturbations never change `P(x | z)` on `C`. Maximality: for factors in
/// `H(x|C)`, some sampled perturbation changes it; a miss within the budget
/// is inconclusive.
pub fn check_duality(
    space: &FactoredSpace,
    x: &RandomVariable,
    z: &RandomVariable,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<SuiteReport> {
    let mut rng = rng_for(seed, Stream::Check, 1);
    let mut r = SuiteReport::default();
    let blocks = space.blocks_of(z)?;
    let histories: BTreeMap<u32, IndexSet> = blocks.iter().map(|(&v, c)| (v, history(space, c, x))).collect();
    for i in 0..space.num_factors() {
        let mut invariant: BTreeMap<u32, bool> = BTreeMap::new();
        let mut changed: BTreeMap<u32, bool> = BTreeMap::new();
        let mut last_pair = None;
        for _ in 0..cfg.perturbation_budget {
            let pair = random_pair(space, &mut rng, i)?;
            let before = cond_table(space, pair.base(), x, z)?;
            let after = cond_table(space, pair.perturbed(), x, z)?;
            for (&zv, h) in &histories {
                let same = conditional_rows_equal(&before, &after, zv);
                if h.contains(i) {
                    *changed.entry(zv).or_default() |= !same;
                } else {
                    *invariant.entry(zv).or_insert(true) &= same;
                }
            }
            last_pair = Some(pair);
        }
        for (zv, ok) in invariant {
            r.check("duality.irrelevance", ok, || {
                let mut cx = counterexample(
                    "duality.irrelevance",
                    format!("factor {i} outside H(x|z={zv}) changed the conditional"),
                    space,
                    &[x, z],
                );
                cx.distribution = last_pair.as_ref().map(|p| DistributionFile::from(p.base()));
                cx
            });
        }
        for (_, hit) in changed {
            if hit {
                r.pass("duality.maximality");
            } else {
                r.inconclusive("duality.maximality");
            }
        }
    }
    Ok(r)
}

/// Product-difference identity under sampled single-factor perturbations of
/// every factor. Requires structural independence.
pub fn check_difference_identity(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    pairs_per_factor: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let mut rng = rng_for(seed, Stream::Check, 2);
    let mut r = SuiteReport::default();
    for i in 0..space.num_factors() {
        for _ in 0..pairs_per_factor {
            let pair = random_pair(space, &mut rng, i)?;
            let rep = product_difference_identity(space, &pair, x, y, z)?;
            r.check("difference_identity", rep.violations.is_empty(), || {
                let mut cx = counterexample(
                    "difference_identity",
                    format!("factor {i}: nonzero cells {:?}", rep.violations),
                    space,
                    &[x, y, z],
                );
                cx.distribution = Some(DistributionFile::from(pair.base()));
                cx
            });
        }
    }
    Ok(r)
}

/// Soundness when `x ⊥ y | z` structurally, witness search otherwise. A
/// witness miss is retried once with a fresh seed; a repeated miss fails.
pub fn check_fundamental(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<SuiteReport> {
    let mut r = SuiteReport::default();
    let cx = |law: &str, detail: String| counterexample(law, detail, space, &[x, y, z]);
    if structurally_independent(space, x, y, z)?.independent {
        let rep = verify_soundness(space, x, y, z, cfg.sample_count, seed)?;
        r.observe("fundamental.structural_instances");
        for _ in 0..rep.held {
            r.pass("soundness");
        }
        for v in rep.violations {
            let mut c = cx("soundness", format!("sample {} (seed {}) violates CI: {:?}", v.sample_index, v.seed, v.report));
            c.distribution = Some(DistributionFile::from(&ProductDistribution::sample(space, v.seed)));
            r.fail(c);
        }
    } else {
        r.observe("fundamental.dependent_instances");
        let found = find_witness(space, x, y, z, cfg.witness_budget, seed)?.is_some();
        if found {
            r.pass("completeness");
        } else {
            r.inconclusive("completeness");
            let retry = find_witness(space, x, y, z, cfg.witness_budget, derive_seed(seed, u64::MAX))?;
            r.check("completeness", retry.is_some(), || {
                cx("completeness", format!("no witness in two budgets of {}", cfg.witness_budget))
            });
        }
    }
    Ok(r)
}

/// Pairwise structural independence of `xs` given `z` implies joint
/// conditional independence under sampled product distributions.
pub fn check_vector_theorem(
    space: &FactoredSpace,
    xs: &[&RandomVariable],
    z: &RandomVariable,
    samples: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let mut r = SuiteReport::default();
    let mut pairwise = true;
    for a in 0..xs.len() {
        for b in a + 1..xs.len() {
            pairwise &= structurally_independent(space, xs[a], xs[b], z)?.independent;
        }
    }
    if !pairwise {
        r.observe("vector_theorem.premise_failed");
        return Ok(r);
    }
    for k in 0..samples {
        let s = derive_seed(seed, k as u64);
        let p = ProductDistribution::sample(space, s);
        let ok = is_jointly_cond_independent(space, &p, xs, z)?;
        r.implication("vector_theorem", true, ok, || {
            let mut vars = xs.to_vec();
            vars.push(z);
            let mut cx = counterexample("vector_theorem", format!("sample seed {s}"), space, &vars);
            cx.distribution = Some(DistributionFile::from(&p));
            cx
        });
    }
    Ok(r)
}

/// Separation condition for `U_J` and `U_(I\J)` given `z`, reading the event
/// classes as generated jointly with `z`: every disjoint pair of events from
/// the two classes is split by a union of `z`-blocks.
///
/// Events of either class are unions of cells `{U_J = a, z = v}`. A pair of
/// disjoint events that no union of blocks splits exists iff some block
/// holds a `J`-cell and an `I\J`-cell that do not meet, so the scan is over
/// cell pairs within blocks.
pub fn separation_condition(space: &FactoredSpace, z: &RandomVariable, j: IndexSet) -> Result<bool> {
    let jc = space.complement(j);
    for c in space.blocks_of(z)?.values() {
        let mut left: Vec<usize> = c.outcomes.iter().map(|&r| space.project(r, j)).collect();
        let mut right: Vec<usize> = c.outcomes.iter().map(|&r| space.project(r, jc)).collect();
        left.sort_unstable();
        left.dedup();
        right.sort_unstable();
        right.dedup();
        let present: std::collections::HashSet<usize> = c.outcomes.iter().copied().collect();
        for &a in &left {
            for &b in &right {
                if !present.contains(&(a + b)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Compares, for every fixed `J`, the rectangle condition on all blocks of
/// `z` with [`separation_condition`]. Exploratory: agreement counts go to
/// `observations`; nothing is asserted.
pub fn check_separation_characterization(space: &FactoredSpace, z: &RandomVariable) -> Result<SuiteReport> {
    let mut r = SuiteReport::default();
    let blocks = space.blocks_of(z)?;
    for j in space.all().subsets() {
        let rect = blocks.values().all(|c| is_rectangle(space, c, j));
        let sep = separation_condition(space, z, j)?;
        match (rect, sep) {
            (true, true) => r.observe("separation.agree_disintegrates"),
            (false, false) => r.observe("separation.agree_not_disintegrates"),
            (true, false) => r.observe("separation.disagree_rectangle_only"),
            (false, true) => r.observe("separation.disagree_separation_only"),
        }
    }
    Ok(r)
}

/// Named groups of checks, selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    Fundamental,
    Semigraphoid,
    HistoryLaws,
    Duality,
    Dag,
    Separation,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Fundamental,
        Suite::Semigraphoid,
        Suite::HistoryLaws,
        Suite::Duality,
        Suite::Dag,
        Suite::Separation,
    ];

    fn salt(self) -> u64 {
        self as u64 + 1
    }

    /// Instance `index` exactly as the suite generates it.
    pub fn instance(self, cfg: &SuiteConfig, index: usize) -> Instance {
        gen_instance(cfg, self.salt(), index)
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Fundamental => "fundamental",
            Suite::Semigraphoid => "semigraphoid",
            Suite::HistoryLaws => "history",
            Suite::Duality => "duality",
            Suite::Dag => "dag",
            Suite::Separation => "separation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown suite `{s}`")))
    }
}

/// DAG generation parameters for [`Suite::Dag`].
pub const DAG_MAX_NODES: usize = 4;
pub const DAG_MAX_INDEGREE: usize = 2;
pub const DAG_DOMAIN: usize = 2;

fn dag_instance_report(cfg: &SuiteConfig, index: usize) -> Result<SuiteReport> {
    let dag = gen_random_dag(cfg.seed, index as u64, DAG_MAX_NODES, DAG_MAX_INDEGREE, DAG_DOMAIN);
    let limits = Limits::default();
    let dag_cx = |law: &str, detail: String| Counterexample {
        law: law.to_string(),
        instance: index,
        seed: cfg.seed,
        detail,
        model: None,
        dag: Some(DagFile::from_dag(&dag)),
        distribution: None,
    };
    let mut r = SuiteReport::default();
    let queries = all_single_queries(&dag);
    let eq = dsep_structural_equivalence(&dag, &queries, &limits)?;
    for _ in 0..eq.agreements {
        r.pass("dag.equivalence");
    }
    for d in eq.disagreements {
        r.fail(dag_cx("dag.equivalence", format!("{d:?}")));
    }
    for q in &queries {
        let ab = dag.d_separated(&[q.x], &[q.y], &q.given)?;
        let ba = dag.d_separated(&[q.y], &[q.x], &q.given)?;
        r.check("dag.dsep_symmetry", ab == ba, || {
            dag_cx("dag.dsep_symmetry", format!("{q:?}"))
        });
    }
    let st = structural_time_vs_ancestry(&dag, &limits)?;
    for node in &st.nodes {
        let ok = !st.history_mismatches.contains(&node.node);
        r.check("dag.node_history", ok, || {
            dag_cx("dag.node_history", format!("{node:?}"))
        });
    }
    let bad_pairs = st.pair_mismatches.len();
    for _ in 0..st.pairs_checked - bad_pairs {
        r.pass("dag.structural_time");
    }
    for (v, w) in st.pair_mismatches {
        r.fail(dag_cx("dag.structural_time", format!("H(X_{v}) ⊆ H(X_{w}) disagrees with ancestry")));
    }
    Ok(r)
}

fn instance_report(suite: Suite, cfg: &SuiteConfig, index: usize) -> Result<SuiteReport> {
    if suite == Suite::Dag {
        let mut r = dag_instance_report(cfg, index)?;
        r.instances = 1;
        return Ok(r);
    }
    let inst = suite.instance(cfg, index);
    let (s, x, y, z, w) = (&inst.space, &inst.x, &inst.y, &inst.z, &inst.w);
    let mut r = match suite {
        Suite::Fundamental => {
            let mut r = check_fundamental(s, x, y, z, cfg, inst.seed)?;
            r.merge(check_vector_theorem(s, &[x, y, w], z, cfg.sample_count.min(10), inst.seed)?);
            r
        }
        Suite::Semigraphoid => semigraphoid_report(&inst)?,
        Suite::HistoryLaws => check_history_laws(s, x, y, z, inst.seed)?,
        Suite::Duality => {
            let mut r = check_duality(s, x, z, cfg, inst.seed)?;
            if structurally_independent(s, x, y, z)?.independent {
                r.merge(check_difference_identity(s, x, y, z, 2, inst.seed)?);
            }
            r
        }
        Suite::Separation => check_separation_characterization(s, z)?,
        Suite::Dag => unreachable!(),
    };
    r.instances = 1;
    Ok(r.for_instance(index, inst.seed))
}

/// Runs `cfg.iterations` instances of each listed suite and aggregates the
/// results in instance order.
pub fn run_suites(cfg: &SuiteConfig, suites: &[Suite]) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut total = SuiteReport::default();
    for &suite in suites {
        let parts: Vec<SuiteReport> = (0..cfg.iterations)
            .into_par_iter()
            .map(|k| instance_report(suite, cfg, k))
            .collect::<Result<_>>()?;
        for p in parts {
            total.merge(p);
        }
    }
    Ok(total)
}

/// Every suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    run_suites(cfg, &Suite::ALL)
}

/// Replays one counterexample-producing instance.
pub fn replay_instance(cfg: &SuiteConfig, suite: Suite, index: usize) -> Result<SuiteReport> {
    instance_report(suite, cfg, index)
}

/// Whether `determines` agrees with its definition on every pair of
/// outcomes of `c`; used by the suites as a self-check of the fast path.
pub fn determines_pairwise(space: &FactoredSpace, c: &Block, j: IndexSet, x: &RandomVariable) -> bool {
    let fast = determines(space, c, j, x);
    let slow = c.outcomes.iter().all(|&a| {
        c.outcomes
            .iter()
            .all(|&b| space.project(a, j) != space.project(b, j) || x.value(a) == x.value(b))
    });
    fast == slow
}
