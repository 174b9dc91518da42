//! JSON file formats: space files, distribution files and DAG files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dag::{Dag, Embedding, Node};
use crate::distributions::{format_ratio, parse_ratio, ProductDistribution};
use crate::error::{Error, Result};
use crate::space::{Factor, FactoredSpace, Limits, RandomVariable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableEntry {
    pub codomain: Vec<String>,
    pub table: Vec<u32>,
}

/// A factored space plus named variables; tables use mixed-radix outcome
/// order with the last factor fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub factors: Vec<FactorEntry>,
    #[serde(default)]
    pub variables: BTreeMap<String, VariableEntry>,
}

/// A parsed space file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub space: FactoredSpace,
    pub variables: BTreeMap<String, RandomVariable>,
}

impl Model {
    /// Resolves a declared variable first, then a factor name.
    pub fn resolve(&self, name: &str) -> Result<RandomVariable> {
        if let Some(v) = self.variables.get(name) {
            return Ok(v.clone());
        }
        match self.space.factor_id(name) {
            Some(i) => self.space.factor_var(i),
            None => Err(Error::InvalidQuery(format!("unknown variable `{name}`"))),
        }
    }

    /// Tuple of the named variables; trivial for an empty list.
    pub fn resolve_tuple(&self, names: &[String]) -> Result<RandomVariable> {
        let vars = names
            .iter()
            .map(|n| self.resolve(n))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&RandomVariable> = vars.iter().collect();
        let mut z = self.space.tuple_var(&refs)?;
        if names.len() > 1 {
            z.name = names.join(",");
        }
        Ok(z)
    }
}

impl SpaceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("space file serializes")
    }

    pub fn from_parts<'a>(
        space: &FactoredSpace,
        variables: impl IntoIterator<Item = &'a RandomVariable>,
    ) -> Self {
        SpaceFile {
            factors: space
                .factors()
                .iter()
                .map(|f| FactorEntry {
                    name: f.name.clone(),
                    domain: f.domain.clone(),
                })
                .collect(),
            variables: variables
                .into_iter()
                .map(|v| {
                    (
                        v.name.clone(),
                        VariableEntry {
                            codomain: v.codomain.clone(),
                            table: v.table.clone(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn into_model(self, limits: &Limits) -> Result<Model> {
        let factors = self
            .factors
            .into_iter()
            .map(|f| Factor::new(f.name, f.domain))
            .collect();
        let space = FactoredSpace::with_limits(factors, limits)?;
        let mut variables = BTreeMap::new();
        for (name, entry) in self.variables {
            let v = RandomVariable::new(name.clone(), entry.codomain, entry.table)?;
            space.check_var(&v)?;
            variables.insert(name, v);
        }
        Ok(Model { space, variables })
    }
}

impl Embedding {
    pub fn to_space_file(&self) -> SpaceFile {
        SpaceFile::from_parts(&self.space, &self.node_vars)
    }
}

/// `{"per_factor": [["num/den", ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionFile {
    pub per_factor: Vec<Vec<String>>,
}

impl From<&ProductDistribution> for DistributionFile {
    fn from(p: &ProductDistribution) -> Self {
        DistributionFile {
            per_factor: p
                .per_factor()
                .iter()
                .map(|v| v.iter().map(format_ratio).collect())
                .collect(),
        }
    }
}

impl DistributionFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_distribution(self, space: &FactoredSpace) -> Result<ProductDistribution> {
        let per_factor = self
            .per_factor
            .iter()
            .map(|v| v.iter().map(|s| parse_ratio(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        ProductDistribution::new(space, per_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagFile {
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

impl DagFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_dag(self) -> Result<Dag> {
        let id = |name: &str| {
            self.nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| Error::UnknownNode(name.to_string()))
        };
        let edges = self
            .edges
            .iter()
            .map(|(p, c)| Ok((id(p)?, id(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Dag::new(self.nodes.clone(), &edges)
    }

    pub fn from_dag(dag: &Dag) -> Self {
        DagFile {
            nodes: dag.nodes().to_vec(),
            edges: dag
                .edges()
                .into_iter()
                .map(|(p, c)| (dag.nodes()[p].name.clone(), dag.nodes()[c].name.clone()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::embed_dag;
    use crate::distributions::ratio;

    const XOR_SPACE: &str = r#"{"factors":[{"name":"u0","domain":["0","1"]},{"name":"u1","domain":["0","1"]}],
        "variables":{"xor":{"codomain":["0","1"],"table":[0,1,1,0]}}}"#;

    #[test]
    fn space_file_roundtrip() {
        let file = SpaceFile::parse(XOR_SPACE).unwrap();
        let model = file.clone().into_model(&Limits::default()).unwrap();
        assert_eq!(model.space.outcome_count(), 4);
        assert_eq!(model.resolve("xor").unwrap().table, vec![0, 1, 1, 0]);
        assert_eq!(model.resolve("u1").unwrap().table, vec![0, 1, 0, 1]);
        assert!(model.resolve("nope").is_err());
        let again = SpaceFile::parse(&file.to_json()).unwrap();
        assert_eq!(again, file);
    }

    #[test]
    fn bad_space_files() {
        assert!(matches!(SpaceFile::parse("{"), Err(Error::Parse(_))));
        let short = r#"{"factors":[{"name":"u0","domain":["0","1"]}],
            "variables":{"x":{"codomain":["a"],"table":[0]}}}"#;
        assert!(matches!(
            SpaceFile::parse(short).unwrap().into_model(&Limits::default()),
            Err(Error::SpaceMismatch { .. })
        ));
        let out_of_range = r#"{"factors":[{"name":"u0","domain":["0","1"]}],
            "variables":{"x":{"codomain":["a"],"table":[0,1]}}}"#;
        assert!(SpaceFile::parse(out_of_range)
            .unwrap()
            .into_model(&Limits::default())
            .is_err());
    }

    #[test]
    fn distribution_file_roundtrip() {
        let s = FactoredSpace::from_sizes(&[2, 3]).unwrap();
        let p = ProductDistribution::sample(&s, 3);
        let json = serde_json::to_string(&p).unwrap();
        let back = DistributionFile::parse(&json).unwrap().into_distribution(&s).unwrap();
        assert_eq!(back, p);
        let uni = DistributionFile::from(&ProductDistribution::uniform(&s));
        assert_eq!(uni.per_factor[0], vec!["1/2", "1/2"]);
        let p = DistributionFile {
            per_factor: vec![vec!["2/4".into(), "1/2".into()], vec!["1".into(), "0".into(), "0/3".into()]],
        }
        .into_distribution(&s)
        .unwrap();
        assert_eq!(p.per_factor()[0][0], ratio(1, 2));
    }

    #[test]
    fn dag_file_and_embedding() {
        let text = r#"{"nodes":[{"name":"A","domain":2},{"name":"B","domain":2},{"name":"C","domain":2}],
            "edges":[["A","C"],["B","C"]]}"#;
        let dag = DagFile::parse(text).unwrap().into_dag().unwrap();
        assert_eq!(DagFile::from_dag(&dag).into_dag().unwrap(), dag);
        let emb = embed_dag(&dag, &Limits::default()).unwrap();
        let file = emb.to_space_file();
        let names: Vec<&str> = file.factors.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["u_A", "u_B", "u_C"]);
        assert!(file.variables.contains_key("X_C"));
        let model = SpaceFile::parse(&file.to_json())
            .unwrap()
            .into_model(&Limits::default())
            .unwrap();
        assert_eq!(model.space, emb.space);
        assert_eq!(model.variables["X_C"], emb.node_vars[2]);

        let bad = r#"{"nodes":[{"name":"A","domain":2}],"edges":[["A","Z"]]}"#;
        assert!(matches!(
            DagFile::parse(bad).unwrap().into_dag(),
            Err(Error::UnknownNode(_))
        ));
    }
}
