//! Exact product distributions and conditional-independence oracles.
//!
//! Every probability here is an exact rational. Conditional-independence
//! checks work on integer outcome weights `w(o)` with `P(o) = w(o) / D` for a
//! common denominator `D`; the identity `P(x,y,z) P(z) = P(x,z) P(y,z)` is
//! homogeneous, so `D` cancels and the check is an integer equality.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{history, structurally_independent};
use crate::space::{FactoredSpace, Outcome, RandomVariable};

pub type Rational = BigRational;

/// Upper end of the numerator grid used by [`ProductDistribution::sample`].
pub const SAMPLE_NUMERATOR_MAX: u32 = 101;

/// Default try budget for [`find_witness`].
pub const DEFAULT_WITNESS_BUDGET: usize = 64;

/// Seed for sample `index` of a batch driven by `master`.
///
/// Each sample owns its RNG stream, so batch results do not depend on the
/// order in which samples are evaluated.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio offset
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"` in lowest terms, also for integers (`"1/1"`).
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational of the form num/den"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub(crate) mod ratio_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

/// One probability vector per factor; factors are independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDistribution {
    per_factor: Vec<Vec<Rational>>,
}

impl ProductDistribution {
    pub fn new(space: &FactoredSpace, per_factor: Vec<Vec<Rational>>) -> Result<Self> {
        if per_factor.len() != space.num_factors() {
            return Err(Error::InvalidDistribution(format!(
                "{} vectors for {} factors",
                per_factor.len(),
                space.num_factors()
            )));
        }
        for (i, (v, &size)) in per_factor.iter().zip(space.sizes()).enumerate() {
            check_vector(v, size).map_err(|e| Error::InvalidDistribution(format!("factor {i}: {e}")))?;
        }
        Ok(ProductDistribution { per_factor })
    }

    pub fn uniform(space: &FactoredSpace) -> Self {
        let per_factor = space
            .sizes()
            .iter()
            .map(|&d| vec![ratio(1, d as i64); d])
            .collect();
        ProductDistribution { per_factor }
    }

    /// Positive distribution on the `1..=101` numerator grid, normalized per
    /// factor. Deterministic in `seed`.
    pub fn sample(space: &FactoredSpace, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_factor = space
            .sizes()
            .iter()
            .map(|&d| sample_vector(&mut rng, d))
            .collect();
        ProductDistribution { per_factor }
    }

    pub fn per_factor(&self) -> &[Vec<Rational>] {
        &self.per_factor
    }

    pub fn factor(&self, i: usize) -> Result<&[Rational]> {
        self.per_factor
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownFactor(i))
    }

    pub fn is_positive(&self) -> bool {
        self.per_factor.iter().flatten().all(Signed::is_positive)
    }

    pub fn outcome_prob(&self, space: &FactoredSpace, o: &Outcome) -> Result<Rational> {
        space.rank(o)?;
        Ok(o
            .0
            .iter()
            .zip(&self.per_factor)
            .fold(Rational::one(), |acc, (&v, p)| acc * &p[v]))
    }

    /// Integer outcome weights `w` and denominator `D` with `P(o) = w[rank(o)] / D`.
    pub fn weights(&self) -> (Vec<BigUint>, BigUint) {
        let mut weights = vec![BigUint::one()];
        let mut denom = BigUint::one();
        for v in &self.per_factor {
            let lcm = v
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            let nums: Vec<BigUint> = v
                .iter()
                .map(|r| (r.numer() * (&lcm / r.denom())).to_biguint().expect("nonnegative"))
                .collect();
            weights = weights
                .iter()
                .flat_map(|w| nums.iter().map(move |n| w * n))
                .collect();
            denom *= lcm.to_biguint().expect("positive");
        }
        (weights, denom)
    }

    pub fn outcome_probs(&self) -> Vec<Rational> {
        let (w, d) = self.weights();
        let d = BigInt::from(d);
        w.into_iter()
            .map(|w| Rational::new(BigInt::from(w), d.clone()))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.per_factor
            .iter()
            .map(|v| v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    fn with_factor(&self, i: usize, v: Vec<Rational>) -> Self {
        let mut per_factor = self.per_factor.clone();
        per_factor[i] = v;
        ProductDistribution { per_factor }
    }
}

fn check_vector(v: &[Rational], size: usize) -> std::result::Result<(), String> {
    if v.len() != size {
        return Err(format!("expected {size} entries, got {}", v.len()));
    }
    if v.iter().any(Signed::is_negative) {
        return Err("negative entry".into());
    }
    let total: Rational = v.iter().sum();
    if !total.is_one() {
        return Err(format!("entries sum to {}", format_ratio(&total)));
    }
    Ok(())
}

/// A positive probability vector of length `d` on the sampling grid.
pub fn sample_vector(rng: &mut impl Rng, d: usize) -> Vec<Rational> {
    let nums: Vec<i64> = (0..d)
        .map(|_| rng.random_range(1..=SAMPLE_NUMERATOR_MAX) as i64)
        .collect();
    let total: i64 = nums.iter().sum();
    nums.into_iter().map(|n| ratio(n, total)).collect()
}

impl Serialize for ProductDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::formats::DistributionFile::from(self).serialize(s)
    }
}

/// Sums of outcome weights over the level sets of `z`, `(z, x)`, `(z, y)`
/// and `(z, x, y)`.
struct Masses {
    z: BTreeMap<u32, BigUint>,
    zx: BTreeMap<(u32, u32), BigUint>,
    zy: BTreeMap<(u32, u32), BigUint>,
    zxy: BTreeMap<(u32, u32, u32), BigUint>,
    x_in_block: BTreeMap<u32, BTreeSet<u32>>,
    y_in_block: BTreeMap<u32, BTreeSet<u32>>,
}

impl Masses {
    fn collect(w: &[BigUint], x: &RandomVariable, y: &RandomVariable, z: &RandomVariable) -> Self {
        let mut m = Masses {
            z: BTreeMap::new(),
            zx: BTreeMap::new(),
            zy: BTreeMap::new(),
            zxy: BTreeMap::new(),
            x_in_block: BTreeMap::new(),
            y_in_block: BTreeMap::new(),
        };
        for (r, w) in w.iter().enumerate() {
            let (zv, xv, yv) = (z.value(r), x.value(r), y.value(r));
            *m.z.entry(zv).or_default() += w;
            *m.zx.entry((zv, xv)).or_default() += w;
            *m.zy.entry((zv, yv)).or_default() += w;
            *m.zxy.entry((zv, xv, yv)).or_default() += w;
            m.x_in_block.entry(zv).or_default().insert(xv);
            m.y_in_block.entry(zv).or_default().insert(yv);
        }
        m
    }

    fn check_positive(&self) -> Result<()> {
        match self.z.iter().find(|(_, w)| w.is_zero()) {
            Some((&zv, _)) => Err(Error::DegenerateBlock(zv)),
            None => Ok(()),
        }
    }
}

fn rat(n: &BigUint, d: &BigUint) -> Rational {
    Rational::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

/// `(z value, x value) -> P(x = xv | z = zv)` over the `x` values attained in
/// each block. Rows sum to one.
pub fn cond_table(
    space: &FactoredSpace,
    p: &ProductDistribution,
    x: &RandomVariable,
    z: &RandomVariable,
) -> Result<BTreeMap<(u32, u32), Rational>> {
    space.check_var(x)?;
    space.check_var(z)?;
    let (w, _) = p.weights();
    let m = Masses::collect(&w, x, z, z);
    m.check_positive()?;
    Ok(m
        .zx
        .iter()
        .map(|(&(zv, xv), wzx)| ((zv, xv), rat(wzx, &m.z[&zv])))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiViolation {
    pub z: u32,
    pub x: u32,
    pub y: u32,
    /// `P(x, y | z)`
    #[serde(with = "ratio_str")]
    pub lhs: Rational,
    /// `P(x | z) P(y | z)`
    #[serde(with = "ratio_str")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiReport {
    pub holds: bool,
    pub first_violation: Option<CiViolation>,
}

/// Exact test of `x ⊥ y | z` under `p`.
pub fn is_cond_independent(
    space: &FactoredSpace,
    p: &ProductDistribution,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
) -> Result<CiReport> {
    space.check_var(x)?;
    space.check_var(y)?;
    space.check_var(z)?;
    let (w, _) = p.weights();
    let m = Masses::collect(&w, x, y, z);
    m.check_positive()?;
    let zero = BigUint::zero();
    for (&zv, wz) in &m.z {
        for &xv in &m.x_in_block[&zv] {
            for &yv in &m.y_in_block[&zv] {
                let wzxy = m.zxy.get(&(zv, xv, yv)).unwrap_or(&zero);
                let wzx = &m.zx[&(zv, xv)];
                let wzy = &m.zy[&(zv, yv)];
                if wzxy * wz != wzx * wzy {
                    return Ok(CiReport {
                        holds: false,
                        first_violation: Some(CiViolation {
                            z: zv,
                            x: xv,
                            y: yv,
                            lhs: rat(wzxy, wz),
                            rhs: rat(wzx, wz) * rat(wzy, wz),
                        }),
                    });
                }
            }
        }
    }
    Ok(CiReport {
        holds: true,
        first_violation: None,
    })
}

/// Floating-point variant of [`is_cond_independent`] with absolute
/// tolerance `tol` on the conditional identity. Meant for spaces where exact
/// weights get too large; never used by the verification suites.
pub fn is_cond_independent_f64(
    space: &FactoredSpace,
    per_factor: &[Vec<f64>],
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    tol: f64,
) -> Result<bool> {
    space.check_var(x)?;
    space.check_var(y)?;
    space.check_var(z)?;
    if per_factor.len() != space.num_factors() {
        return Err(Error::InvalidDistribution("wrong number of factor vectors".into()));
    }
    let mut pz: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pzx: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut pzy: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut pzxy: BTreeMap<(u32, u32, u32), f64> = BTreeMap::new();
    for r in 0..space.outcome_count() {
        let pr: f64 = (0..space.num_factors())
            .map(|i| per_factor[i][space.digit(r, i)])
            .product();
        let (zv, xv, yv) = (z.value(r), x.value(r), y.value(r));
        *pz.entry(zv).or_default() += pr;
        *pzx.entry((zv, xv)).or_default() += pr;
        *pzy.entry((zv, yv)).or_default() += pr;
        *pzxy.entry((zv, xv, yv)).or_default() += pr;
    }
    for (&(zv, xv), &a) in &pzx {
        let c = pz[&zv];
        if c <= 0.0 {
            return Err(Error::DegenerateBlock(zv));
        }
        for (&(_, yv), &b) in pzy.range((zv, 0)..=(zv, u32::MAX)) {
            let joint = pzxy.get(&(zv, xv, yv)).copied().unwrap_or(0.0) / c;
            if (joint - (a / c) * (b / c)).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact test that the family `xs` is jointly independent given `z`:
/// `P(x_1, .., x_n | z) = ∏ P(x_k | z)` for all attained values.
pub fn is_jointly_cond_independent(
    space: &FactoredSpace,
    p: &ProductDistribution,
    xs: &[&RandomVariable],
    z: &RandomVariable,
) -> Result<bool> {
    for x in xs {
        space.check_var(x)?;
    }
    space.check_var(z)?;
    let (w, _) = p.weights();
    let n = xs.len();
    let mut wz: BTreeMap<u32, BigUint> = BTreeMap::new();
    let mut marg: Vec<BTreeMap<(u32, u32), BigUint>> = vec![BTreeMap::new(); n];
    let mut joint: BTreeMap<(u32, Vec<u32>), BigUint> = BTreeMap::new();
    for (r, w) in w.iter().enumerate() {
        let zv = z.value(r);
        *wz.entry(zv).or_default() += w;
        let vals: Vec<u32> = xs.iter().map(|x| x.value(r)).collect();
        for (k, &v) in vals.iter().enumerate() {
            *marg[k].entry((zv, v)).or_default() += w;
        }
        *joint.entry((zv, vals)).or_default() += w;
    }
    if let Some((&zv, _)) = wz.iter().find(|(_, w)| w.is_zero()) {
        return Err(Error::DegenerateBlock(zv));
    }
    let zero = BigUint::zero();
    for (&zv, total) in &wz {
        let per_k: Vec<Vec<(u32, &BigUint)>> = marg
            .iter()
            .map(|m| {
                m.range((zv, 0)..=(zv, u32::MAX))
                    .map(|(&(_, v), w)| (v, w))
                    .collect()
            })
            .collect();
        if per_k.iter().any(Vec::is_empty) {
            continue;
        }
        let scale = total.pow(n.saturating_sub(1) as u32);
        // odometer over the product of attained values
        let mut idx = vec![0usize; n];
        'cells: loop {
            let vals: Vec<u32> = idx.iter().enumerate().map(|(k, &i)| per_k[k][i].0).collect();
            let lhs = joint.get(&(zv, vals)).unwrap_or(&zero) * &scale;
            let rhs = idx
                .iter()
                .enumerate()
                .fold(BigUint::one(), |acc, (k, &i)| acc * per_k[k][i].1);
            if lhs != rhs {
                return Ok(false);
            }
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < per_k[k].len() {
                    continue 'cells;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleViolation {
    pub sample_index: usize,
    pub seed: u64,
    pub report: CiReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub samples: usize,
    pub held: usize,
    pub violations: Vec<SampleViolation>,
}

/// Checks exact conditional independence under `n` sampled product
/// distributions. Requires `x ⊥ y | z` structurally.
pub fn verify_soundness(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    n: usize,
    seed: u64,
) -> Result<SoundnessReport> {
    if !structurally_independent(space, x, y, z)?.independent {
        return Err(Error::NotStructural);
    }
    let results: Vec<(usize, u64, CiReport)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let p = ProductDistribution::sample(space, s);
            is_cond_independent(space, &p, x, y, z).map(|r| (k, s, r))
        })
        .collect::<Result<_>>()?;
    let violations: Vec<SampleViolation> = results
        .into_iter()
        .filter(|(_, _, r)| !r.holds)
        .map(|(sample_index, seed, report)| SampleViolation {
            sample_index,
            seed,
            report,
        })
        .collect();
    Ok(SoundnessReport {
        samples: n,
        held: n - violations.len(),
        violations,
    })
}

/// A product distribution under which `x ⊥ y | z` fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub try_index: usize,
    pub seed: u64,
    pub distribution: ProductDistribution,
    pub report: CiReport,
}

/// Searches sampled product distributions for a violation of `x ⊥ y | z`.
/// Requires that `x` and `y` are not structurally independent given `z`.
pub fn find_witness(
    space: &FactoredSpace,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
    max_tries: usize,
    seed: u64,
) -> Result<Option<Witness>> {
    if structurally_independent(space, x, y, z)?.independent {
        return Err(Error::IsStructural);
    }
    for k in 0..max_tries {
        let s = derive_seed(seed, k as u64);
        let p = ProductDistribution::sample(space, s);
        let report = is_cond_independent(space, &p, x, y, z)?;
        if !report.holds {
            return Ok(Some(Witness {
                try_index: k,
                seed: s,
                distribution: p,
                report,
            }));
        }
    }
    Ok(None)
}

/// Two positive product distributions that differ only in one factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationPair {
    base: ProductDistribution,
    perturbed: ProductDistribution,
    factor: usize,
}

impl PerturbationPair {
    pub fn base(&self) -> &ProductDistribution {
        &self.base
    }

    pub fn perturbed(&self) -> &ProductDistribution {
        &self.perturbed
    }

    pub fn factor(&self) -> usize {
        self.factor
    }
}

/// Replaces factor `i`'s vector of `p` by `v`.
pub fn perturb_factor(p: &ProductDistribution, i: usize, v: Vec<Rational>) -> Result<PerturbationPair> {
    let current = p
        .factor(i)
        .map_err(|_| Error::BadPerturbation(format!("no factor {i}")))?;
    check_vector(&v, current.len()).map_err(Error::BadPerturbation)?;
    if !v.iter().all(Signed::is_positive) {
        return Err(Error::BadPerturbation("perturbation vector must be positive".into()));
    }
    if !p.is_positive() {
        return Err(Error::BadPerturbation("base distribution must be positive".into()));
    }
    Ok(PerturbationPair {
        perturbed: p.with_factor(i, v),
        base: p.clone(),
        factor: i,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Blocks where the perturbed factor lies outside the history.
    pub checked: Vec<u32>,
    /// Blocks where the perturbed factor is part of the history.
    pub skipped: Vec<u32>,
    pub violations: Vec<u32>,
}

/// Outside the history, reweighting a factor leaves `P(x | z)` unchanged.
pub fn irrelevance_invariance(
    space: &FactoredSpace,
    pair: &PerturbationPair,
    x: &RandomVariable,
    z: &RandomVariable,
) -> Result<InvarianceReport> {
    let before = cond_table(space, &pair.base, x, z)?;
    let after = cond_table(space, &pair.perturbed, x, z)?;
    let mut report = InvarianceReport::default();
    for (zv, c) in space.blocks_of(z)? {
        if history(space, &c, x).contains(pair.factor) {
            report.skipped.push(zv);
            continue;
        }
        report.checked.push(zv);
        let rows_equal = before
            .range((zv, 0)..=(zv, u32::MAX))
            .all(|(k, v)| after.get(k) == Some(v));
        if !rows_equal {
            report.violations.push(zv);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceReport {
    pub cells_checked: usize,
    /// `(z, x, y)` cells where the product of differences is nonzero.
    pub violations: Vec<(u32, u32, u32)>,
}

/// `(P(x=a|z) - Q(x=a|z)) (P(y=b|z) - Q(y=b|z)) = 0` on every cell, for a
/// structurally independent pair and a single-factor perturbation.
pub fn product_difference_identity(
    space: &FactoredSpace,
    pair: &PerturbationPair,
    x: &RandomVariable,
    y: &RandomVariable,
    z: &RandomVariable,
) -> Result<DifferenceReport> {
    if !structurally_independent(space, x, y, z)?.independent {
        return Err(Error::NotStructural);
    }
    let px = cond_table(space, &pair.base, x, z)?;
    let qx = cond_table(space, &pair.perturbed, x, z)?;
    let py = cond_table(space, &pair.base, y, z)?;
    let qy = cond_table(space, &pair.perturbed, y, z)?;
    let mut report = DifferenceReport::default();
    for ((zv, xv), pa) in &px {
        let dx = pa - &qx[&(*zv, *xv)];
        for ((_, yv), pb) in py.range((*zv, 0)..=(*zv, u32::MAX)) {
            let dy = pb - &qy[&(*zv, *yv)];
            report.cells_checked += 1;
            if !(&dx * &dy).is_zero() {
                report.violations.push((*zv, *xv, *yv));
            }
        }
    }
    Ok(report)
}
