//! Slow, literal reference implementations used as test oracles. They work
//! on plain sizes and tables and share no code with the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Digits of outcome `r`, last factor fastest.
pub fn digits(sizes: &[usize], mut r: usize) -> Vec<usize> {
    let mut d = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        d[i] = r % sizes[i];
        r /= sizes[i];
    }
    d
}

pub fn outcomes(sizes: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = sizes.iter().product();
    (0..n).map(|r| digits(sizes, r)).collect()
}

/// All subsets of `0..n` as sorted vectors.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn agree_on(a: &[usize], b: &[usize], j: &[usize]) -> bool {
    j.iter().all(|&i| a[i] == b[i])
}

/// `x` is a function of the `j` coordinates on `c`, checked pair by pair.
pub fn determines(c: &[Vec<usize>], x: &BTreeMap<Vec<usize>, u32>, j: &[usize]) -> bool {
    c.iter()
        .all(|a| c.iter().all(|b| !agree_on(a, b, j) || x[a] == x[b]))
}

/// `c` contains every splice of two of its members along `j`.
pub fn rectangle(c: &[Vec<usize>], j: &[usize]) -> bool {
    let members: BTreeSet<&Vec<usize>> = c.iter().collect();
    c.iter().all(|a| {
        c.iter().all(|b| {
            let splice: Vec<usize> = (0..a.len()).map(|i| if j.contains(&i) { a[i] } else { b[i] }).collect();
            members.contains(&splice)
        })
    })
}

/// The smallest generating set, found by scanning every subset; panics if
/// the minimal generating sets are not unique.
pub fn history(n: usize, c: &[Vec<usize>], x: &BTreeMap<Vec<usize>, u32>) -> Vec<usize> {
    let gens: Vec<Vec<usize>> = all_subsets(n)
        .into_iter()
        .filter(|j| determines(c, x, j) && rectangle(c, j))
        .collect();
    let minimal: Vec<&Vec<usize>> = gens
        .iter()
        .filter(|g| !gens.iter().any(|h| h != *g && h.iter().all(|i| g.contains(i))))
        .collect();
    assert_eq!(minimal.len(), 1, "minimal generating sets {minimal:?}");
    minimal[0].clone()
}

/// Outcomes of `sizes` keyed to their table values.
pub fn keyed(sizes: &[usize], table: &[u32]) -> BTreeMap<Vec<usize>, u32> {
    outcomes(sizes).into_iter().zip(table.iter().copied()).collect()
}

/// Blocks of `z`, each a list of outcomes.
pub fn blocks(sizes: &[usize], z: &[u32]) -> BTreeMap<u32, Vec<Vec<usize>>> {
    let mut out: BTreeMap<u32, Vec<Vec<usize>>> = BTreeMap::new();
    for (o, &v) in outcomes(sizes).into_iter().zip(z) {
        out.entry(v).or_default().push(o);
    }
    out
}

/// Per-block histories of `x` given `z`.
pub fn conditional_history(sizes: &[usize], x: &[u32], z: &[u32]) -> BTreeMap<u32, Vec<usize>> {
    let xk = keyed(sizes, x);
    blocks(sizes, z)
        .into_iter()
        .map(|(v, c)| (v, history(sizes.len(), &c, &xk)))
        .collect()
}

pub fn structurally_independent(sizes: &[usize], x: &[u32], y: &[u32], z: &[u32]) -> bool {
    let hx = conditional_history(sizes, x, z);
    let hy = conditional_history(sizes, y, z);
    hx.iter().all(|(v, a)| a.iter().all(|i| !hy[v].contains(i)))
}

/// Exact `P(outcome)` under independent factors.
pub fn joint(probs: &[Vec<BigRational>]) -> Vec<BigRational> {
    let sizes: Vec<usize> = probs.iter().map(|p| p.len()).collect();
    outcomes(&sizes)
        .iter()
        .map(|o| o.iter().enumerate().map(|(i, &d)| probs[i][d].clone()).product())
        .collect()
}

/// `P(x,y,z) P(z) = P(x,z) P(y,z)` for every value triple.
pub fn cond_independent(probs: &[Vec<BigRational>], x: &[u32], y: &[u32], z: &[u32]) -> bool {
    let p = joint(probs);
    let mut pz: BTreeMap<u32, BigRational> = BTreeMap::new();
    let mut pxz: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
    let mut pyz: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
    let mut pxyz: BTreeMap<(u32, u32, u32), BigRational> = BTreeMap::new();
    for r in 0..p.len() {
        let add = |m: &mut BigRational| *m += &p[r];
        add(pz.entry(z[r]).or_insert_with(BigRational::zero));
        add(pxz.entry((x[r], z[r])).or_insert_with(BigRational::zero));
        add(pyz.entry((y[r], z[r])).or_insert_with(BigRational::zero));
        add(pxyz.entry((x[r], y[r], z[r])).or_insert_with(BigRational::zero));
    }
    let zero = BigRational::zero();
    for (&(a, c), pac) in &pxz {
        for (&(b, c2), pbc) in &pyz {
            if c != c2 {
                continue;
            }
            let pabc = pxyz.get(&(a, b, c)).unwrap_or(&zero);
            if pabc * &pz[&c] != pac * pbc {
                return false;
            }
        }
    }
    true
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// d-separation by listing every simple path of the skeleton between `x`
/// and `y` and testing each for activity.
pub fn d_separated(n: usize, edges: &[(usize, usize)], x: usize, y: usize, zs: &[usize]) -> bool {
    let has = |a: usize, b: usize| edges.contains(&(a, b));
    let mut desc: Vec<BTreeSet<usize>> = (0..n).map(|v| BTreeSet::from([v])).collect();
    for _ in 0..n {
        for &(p, c) in edges {
            let add: Vec<usize> = desc[c].iter().copied().collect();
            desc[p].extend(add);
        }
    }
    let active = |path: &[usize]| {
        path.windows(3).all(|w| {
            let (a, m, b) = (w[0], w[1], w[2]);
            if has(a, m) && has(b, m) {
                desc[m].iter().any(|d| zs.contains(d))
            } else {
                !zs.contains(&m)
            }
        })
    };
    let mut stack = vec![vec![x]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == y {
            if active(&path) {
                return false;
            }
            continue;
        }
        for v in 0..n {
            if !path.contains(&v) && (has(last, v) || has(v, last)) {
                let mut next = path.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
    true
}

/// Strict ancestors of `v`.
pub fn ancestors(edges: &[(usize, usize)], v: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![v];
    while let Some(w) = frontier.pop() {
        for &(p, c) in edges {
            if c == w && out.insert(p) {
                frontier.push(p);
            }
        }
    }
    out
}

/// Separation condition with the event classes generated jointly by the
/// coordinates in `j` (resp. outside `j`) and `z`: every disjoint pair of
/// events, one from each class, is split by some union of `z`-blocks.
/// Enumerates all events; only for tiny spaces.
pub fn separation_by_events(sizes: &[usize], z: &[u32], j: &[usize]) -> bool {
    let outs = outcomes(sizes);
    let n = outs.len();
    assert!(n <= 16);
    let jc: Vec<usize> = (0..sizes.len()).filter(|i| !j.contains(i)).collect();
    let cells = |coords: &[usize]| -> Vec<u32> {
        let mut keys: BTreeMap<(u32, Vec<usize>), u32> = BTreeMap::new();
        let mut masks: Vec<u32> = Vec::new();
        for (r, o) in outs.iter().enumerate() {
            let key = (z[r], coords.iter().map(|&i| o[i]).collect());
            let next = keys.len() as u32;
            let id = *keys.entry(key).or_insert(next);
            if id as usize == masks.len() {
                masks.push(0);
            }
            masks[id as usize] |= 1 << r;
        }
        masks
    };
    let events = |cells: &[u32]| -> Vec<u32> {
        (0u32..1 << cells.len())
            .map(|m| (0..cells.len()).filter(|k| m >> k & 1 == 1).fold(0, |acc, k| acc | cells[k]))
            .collect()
    };
    let blocks: BTreeSet<u32> = z.iter().copied().collect();
    let block_masks: Vec<u32> = blocks
        .iter()
        .map(|&v| (0..n).filter(|&r| z[r] == v).fold(0, |acc, r| acc | 1 << r))
        .collect();
    let unions = events(&block_masks);
    let left = events(&cells(j));
    let right = events(&cells(&jc));
    left.iter().all(|&a| {
        right
            .iter()
            .all(|&b| a & b != 0 || unions.iter().any(|&c| a & !c == 0 && b & c == 0))
    })
}
