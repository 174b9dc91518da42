//! DAGs, d-separation, and the response-function embedding into a factored
//! space.
//!
//! Each node `v` gets one factor `u_v` whose values are all functions from
//! joint parent assignments to the domain of `v`. The node variable `X_v`
//! applies the function selected by `u_v` to the evaluated parents, so
//! `X_v` depends on exactly the factors of its ancestors and itself.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{history, structurally_independent};
use crate::space::{Factor, FactoredSpace, IndexSet, Limits, RandomVariable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub domain: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<Node>,
    /// Sorted by node id.
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    pub fn new(nodes: Vec<Node>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        let mut names = BTreeSet::new();
        for node in &nodes {
            if node.domain < 2 {
                return Err(Error::InvalidDag(format!(
                    "node `{}` has domain {}; at least 2 values are required",
                    node.name, node.domain
                )));
            }
            if !names.insert(node.name.as_str()) {
                return Err(Error::InvalidDag(format!("duplicate node name `{}`", node.name)));
            }
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p >= n || c >= n {
                return Err(Error::InvalidDag(format!("edge ({p}, {c}) refers to a missing node")));
            }
            if p == c {
                return Err(Error::InvalidDag(format!("self loop on `{}`", nodes[p].name)));
            }
            if parents[c].contains(&p) {
                return Err(Error::InvalidDag(format!(
                    "duplicate edge {} -> {}",
                    nodes[p].name, nodes[c].name
                )));
            }
            parents[c].push(p);
            children[p].push(c);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }

        // Kahn, smallest id first
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != n {
            return Err(Error::InvalidDag("graph has a directed cycle".into()));
        }
        Ok(Dag {
            nodes,
            parents,
            children,
            topo,
        })
    }

    /// DAG with all nodes of the same domain size.
    pub fn with_uniform_domain(names: &[&str], domain: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let nodes = names
            .iter()
            .map(|&name| Node {
                name: name.to_string(),
                domain,
            })
            .collect();
        Dag::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|c| self.parents[c].iter().map(move |&p| (p, c)))
            .collect()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn node_id(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(format!("#{v}")))
        }
    }

    /// Strict ancestors of `v`.
    pub fn ancestors(&self, v: usize) -> Result<BTreeSet<usize>> {
        self.check_node(v)?;
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = self.parents[v].clone();
        while let Some(u) = stack.pop() {
            if seen.insert(u) {
                stack.extend_from_slice(&self.parents[u]);
            }
        }
        Ok(seen)
    }

    /// Whether every walk from `xs` to `ys` is blocked given `zs`.
    ///
    /// Reachability over `(node, arrived-from-child?)` states: a node
    /// outside `zs` passes traffic except parent-to-parent, and a collider
    /// passes parent-to-parent traffic iff it is in `zs` or has a descendant
    /// in `zs`.
    pub fn d_separated(&self, xs: &[usize], ys: &[usize], zs: &[usize]) -> Result<bool> {
        for &v in xs.iter().chain(ys).chain(zs) {
            self.check_node(v)?;
        }
        let n = self.len();
        let to_mask = |s: &[usize]| {
            let mut m = vec![false; n];
            for &v in s {
                m[v] = true;
            }
            m
        };
        let (in_x, in_y, in_z) = (to_mask(xs), to_mask(ys), to_mask(zs));
        if (0..n).any(|v| (in_x[v] && in_y[v]) || (in_x[v] && in_z[v]) || (in_y[v] && in_z[v])) {
            return Err(Error::InvalidQuery("node sets must be pairwise disjoint".into()));
        }

        // zs together with its ancestors: colliders that may open
        let mut opens = in_z.clone();
        let mut stack: Vec<usize> = zs.to_vec();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !opens[p] {
                    opens[p] = true;
                    stack.push(p);
                }
            }
        }

        // state index: 2 * v + (1 if arrived from a child, 0 if from a parent)
        let mut visited = vec![false; 2 * n];
        let mut queue: VecDeque<(usize, bool)> = xs.iter().map(|&x| (x, true)).collect();
        while let Some((v, from_child)) = queue.pop_front() {
            let s = 2 * v + from_child as usize;
            if visited[s] {
                continue;
            }
            visited[s] = true;
            if !in_z[v] && in_y[v] {
                return Ok(false);
            }
            if from_child {
                if !in_z[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
            } else {
                if !in_z[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
                if opens[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                }
            }
        }
        Ok(true)
    }

    /// Number of joint parent assignments of `v`.
    fn parent_assignments(&self, v: usize) -> Option<usize> {
        self.parents[v]
            .iter()
            .try_fold(1usize, |acc, &p| acc.checked_mul(self.nodes[p].domain))
    }

    /// Size of the response-function factor `u_v`.
    fn response_size(&self, v: usize) -> Option<usize> {
        let m = u32::try_from(self.parent_assignments(v)?).ok()?;
        self.nodes[v].domain.checked_pow(m)
    }
}

/// A DAG realized as node variables over its response-function space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub space: FactoredSpace,
    /// Indexed by node id; named `X_<node>`.
    pub node_vars: Vec<RandomVariable>,
}

impl Embedding {
    /// Tuple of the node variables of `zs`; trivial when `zs` is empty.
    pub fn conditioning_var(&self, zs: &[usize]) -> Result<RandomVariable> {
        let vars: Vec<&RandomVariable> = zs.iter().map(|&v| &self.node_vars[v]).collect();
        self.space.tuple_var(&vars)
    }
}

fn function_label(table: &[usize], domain: usize) -> String {
    if domain <= 10 {
        table.iter().map(|v| char::from(b'0' + *v as u8)).collect()
    } else {
        table
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Digits of `k` in base `d`, most significant first, `m` of them.
fn function_table(mut k: usize, d: usize, m: usize) -> Vec<usize> {
    let mut t = vec![0; m];
    for slot in t.iter_mut().rev() {
        *slot = k % d;
        k /= d;
    }
    t
}

/// Response-function embedding. Factor `u_v` has `|dom v|^(#parent assignments)`
/// values; value `k` encodes the function table in base `|dom v|`, entry for
/// parent assignment 0 most significant. Parent assignments are ranked in
/// mixed radix over the parents in node order, last parent fastest.
pub fn embed_dag(dag: &Dag, limits: &Limits) -> Result<Embedding> {
    let too_large = |v: usize| {
        Error::SpaceTooLarge(format!(
            "response factor of node `{}` is too large",
            dag.nodes[v].name
        ))
    };
    let mut factors = Vec::with_capacity(dag.len());
    let mut arity = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let d = dag.nodes[v].domain;
        let size = dag.response_size(v).ok_or_else(|| too_large(v))?;
        if size > limits.max_outcomes {
            return Err(too_large(v));
        }
        let m = dag.parent_assignments(v).ok_or_else(|| too_large(v))?;
        arity.push(m);
        let domain = if dag.parents[v].is_empty() {
            (0..d).map(|k| k.to_string()).collect()
        } else {
            (0..size)
                .map(|k| function_label(&function_table(k, d, m), d))
                .collect()
        };
        factors.push(Factor::new(format!("u_{}", dag.nodes[v].name), domain));
    }
    let space = FactoredSpace::with_limits(factors, limits)?;

    let n = dag.len();
    let mut tables = vec![vec![0u32; space.outcome_count()]; n];
    let mut vals = vec![0usize; n];
    for r in 0..space.outcome_count() {
        for &v in dag.topological_order() {
            let d = dag.nodes[v].domain;
            let k = space.digit(r, v);
            let pa = &dag.parents[v];
            vals[v] = if pa.is_empty() {
                k
            } else {
                let m = arity[v];
                let a = pa.iter().fold(0, |acc, &p| acc * dag.nodes[p].domain + vals[p]);
                (k / d.pow((m - 1 - a) as u32)) % d
            };
            tables[v][r] = vals[v] as u32;
        }
    }
    let node_vars = tables
        .into_iter()
        .enumerate()
        .map(|(v, table)| {
            RandomVariable::from_table(format!("X_{}", dag.nodes[v].name), dag.nodes[v].domain, table)
        })
        .collect::<Result<_>>()?;
    Ok(Embedding { space, node_vars })
}

/// A conditional-independence query on node ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub x: usize,
    pub y: usize,
    pub given: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub x: String,
    pub y: String,
    pub given: Vec<String>,
    pub d_separated: bool,
    pub structural: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub agreements: usize,
    pub disagreements: Vec<QueryOutcome>,
}

/// All queries `(x, y, Z)` with `x != y` and `Z` ranging over the subsets
/// of the remaining nodes.
pub fn all_single_queries(dag: &Dag) -> Vec<Query> {
    let n = dag.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let rest = IndexSet::full(n) - IndexSet::singleton(x) - IndexSet::singleton(y);
            for z in rest.subsets() {
                out.push(Query {
                    x,
                    y,
                    given: z.iter().collect(),
                });
            }
        }
    }
    out
}

/// Compares d-separation with structural independence of the embedded node
/// variables, query by query.
pub fn dsep_structural_equivalence(dag: &Dag, queries: &[Query], limits: &Limits) -> Result<EquivalenceReport> {
    let emb = embed_dag(dag, limits)?;
    let mut report = EquivalenceReport::default();
    for q in queries {
        let d_sep = dag.d_separated(&[q.x], &[q.y], &q.given)?;
        let z = emb.conditioning_var(&q.given)?;
        let structural =
            structurally_independent(&emb.space, &emb.node_vars[q.x], &emb.node_vars[q.y], &z)?
                .independent;
        if d_sep == structural {
            report.agreements += 1;
        } else {
            report.disagreements.push(QueryOutcome {
                x: dag.nodes[q.x].name.clone(),
                y: dag.nodes[q.y].name.clone(),
                given: q.given.iter().map(|&v| dag.nodes[v].name.clone()).collect(),
                d_separated: d_sep,
                structural,
            });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHistory {
    pub node: String,
    /// Factor names in `H(X_node)`.
    pub history: Vec<String>,
    /// `u_w` for `w` among the ancestors of the node and the node itself.
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralTimeReport {
    pub nodes: Vec<NodeHistory>,
    pub history_mismatches: Vec<String>,
    pub pairs_checked: usize,
    /// `(v, w)` where `H(X_v) ⊆ H(X_w)` disagrees with `v ∈ An(w) ∪ {w}`.
    pub pair_mismatches: Vec<(String, String)>,
}

impl StructuralTimeReport {
    pub fn passed(&self) -> bool {
        self.history_mismatches.is_empty() && self.pair_mismatches.is_empty()
    }
}

/// Unconditional histories of the node variables against ancestry.
pub fn structural_time_vs_ancestry(dag: &Dag, limits: &Limits) -> Result<StructuralTimeReport> {
    let emb = embed_dag(dag, limits)?;
    let omega = emb.space.full_block();
    let names = |s: IndexSet| -> Vec<String> {
        s.iter().map(|i| emb.space.factors()[i].name.clone()).collect()
    };
    let n = dag.len();
    let mut report = StructuralTimeReport::default();
    let mut histories = Vec::with_capacity(n);
    let mut lineage = Vec::with_capacity(n);
    for v in 0..n {
        let h = history(&emb.space, &omega, &emb.node_vars[v]);
        let mut expected: IndexSet = dag.ancestors(v)?.into_iter().collect();
        expected.insert(v);
        if h != expected {
            report.history_mismatches.push(dag.nodes[v].name.clone());
        }
        report.nodes.push(NodeHistory {
            node: dag.nodes[v].name.clone(),
            history: names(h),
            expected: names(expected),
        });
        histories.push(h);
        lineage.push(expected);
    }
    for v in 0..n {
        for w in 0..n {
            report.pairs_checked += 1;
            let earlier = histories[v].is_subset(histories[w]);
            if earlier != lineage[w].contains(v) {
                report
                    .pair_mismatches
                    .push((dag.nodes[v].name.clone(), dag.nodes[w].name.clone()));
            }
        }
    }
    Ok(report)
}
