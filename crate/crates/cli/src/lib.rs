//! Command implementations for the `facthist` binary.
//!
//! Each command returns a [`Response`]: a JSON report and an exit code.
//! Exit codes: 0 affirmative, 1 negative verdict, 2 bad input, 3 cap
//! exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use facthist::dag::{embed_dag, Dag};
use facthist::distributions::{find_witness, verify_soundness, DEFAULT_WITNESS_BUDGET};
use facthist::formats::{DagFile, DistributionFile, Model, SpaceFile};
use facthist::history::{conditional_history, disintegration_atoms, structurally_independent};
use facthist::verification::{run_suites, Suite, SuiteConfig};
use facthist::{FactoredSpace, IndexSet, Limits, RandomVariable};
use serde_json::{json, Map, Value};

pub const MAX_OUTCOMES_ENV: &str = "FACTHIST_MAX_OUTCOMES";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}", .0)]
    Lib(#[from] facthist::Error),
    #[error("{MAX_OUTCOMES_ENV} must be a positive integer, got `{0}`")]
    Env(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(facthist::Error::SpaceTooLarge(_)) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "facthist", version, about = "Histories, structural independence and d-separation on finite factored sets")]
pub struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional history of a variable on each block of the conditioning variable.
    History {
        space: PathBuf,
        #[arg(long = "var")]
        var: String,
        /// Comma-separated conditioning variables.
        #[arg(long, value_delimiter = ',', conflicts_with = "unconditional")]
        given: Vec<String>,
        #[arg(long)]
        unconditional: bool,
    },
    /// Structural independence of two variables; exit 0 if independent.
    Indep {
        space: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// d-separation of two nodes; exit 0 if separated.
    Dsep {
        dag: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        given: Vec<String>,
    },
    /// Response-function embedding of a DAG as a space file.
    Embed {
        dag: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Checks conditional independence under sampled product distributions,
    /// or searches for a violating one when the pair is not structural.
    Verify {
        space: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_WITNESS_BUDGET)]
        budget: usize,
    },
    /// Searches for a product distribution violating conditional independence.
    Witness {
        space: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_WITNESS_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs the randomized law suites.
    Axioms {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 4)]
        max_factors: usize,
        #[arg(long, default_value_t = 3)]
        max_domain: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_WITNESS_BUDGET)]
        witness_budget: usize,
        #[arg(long, default_value_t = 16)]
        perturbation_budget: usize,
        /// Comma-separated subset of: fundamental, semigraphoid, history,
        /// duality, dag, separation.
        #[arg(long = "suite", value_delimiter = ',')]
        suites: Vec<Suite>,
    },
    /// Rectangle atoms and trivial factors of each block.
    Atoms {
        space: PathBuf,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub body: Value,
    pub code: u8,
}

impl Response {
    fn verdict(body: Value, affirmative: bool) -> Self {
        Response {
            body,
            code: if affirmative { 0 } else { 1 },
        }
    }

    fn ok(body: Value) -> Self {
        Response { body, code: 0 }
    }

    pub fn render(&self, pretty: bool) -> String {
        if pretty {
            let mut out = String::new();
            render_text(&self.body, 0, &mut out);
            out
        } else {
            let mut s = serde_json::to_string(&self.body).expect("json values serialize");
            s.push('\n');
            s
        }
    }
}

/// Space cap from the environment, falling back to the default.
pub fn limits_from_env() -> CliResult<Limits> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var(MAX_OUTCOMES_ENV) {
        limits.max_outcomes = match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(CliError::Env(v)),
        };
    }
    Ok(limits)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(path: &Path, limits: &Limits) -> CliResult<Model> {
    Ok(SpaceFile::parse(&read(path)?)?.into_model(limits)?)
}

fn load_dag(path: &Path) -> CliResult<Dag> {
    Ok(DagFile::parse(&read(path)?)?.into_dag()?)
}

fn names(space: &FactoredSpace, s: IndexSet) -> Value {
    s.iter().map(|i| Value::from(space.factors()[i].name.as_str())).collect()
}

fn per_block(space: &FactoredSpace, z: &RandomVariable, sets: &BTreeMap<u32, IndexSet>) -> Value {
    let map: Map<String, Value> = sets
        .iter()
        .map(|(&v, &s)| (z.label(v).to_string(), names(space, s)))
        .collect();
    Value::Object(map)
}

pub fn run(cli: &Cli, limits: &Limits) -> CliResult<Response> {
    match &cli.command {
        Command::History {
            space,
            var,
            given,
            unconditional: _,
        } => {
            let m = load_model(space, limits)?;
            let x = m.resolve(var)?;
            let z = m.resolve_tuple(given)?;
            let h = conditional_history(&m.space, &x, &z)?;
            Ok(Response::ok(per_block(&m.space, &z, &h.per_block)))
        }
        Command::Indep { space, x, y, given } => {
            let m = load_model(space, limits)?;
            let (xv, yv, z) = (m.resolve(x)?, m.resolve(y)?, m.resolve_tuple(given)?);
            let verdict = structurally_independent(&m.space, &xv, &yv, &z)?;
            let hx = conditional_history(&m.space, &xv, &z)?;
            let hy = conditional_history(&m.space, &yv, &z)?;
            let body = json!({
                "x": x,
                "y": y,
                "given": given,
                "independent": verdict.independent,
                "histories": {
                    "x": per_block(&m.space, &z, &hx.per_block),
                    "y": per_block(&m.space, &z, &hy.per_block),
                },
                "overlaps": per_block(&m.space, &z, &verdict.overlaps),
            });
            Ok(Response::verdict(body, verdict.independent))
        }
        Command::Dsep { dag, x, y, given } => {
            let g = load_dag(dag)?;
            let id = |n: &String| g.node_id(n);
            let zs = given.iter().map(id).collect::<facthist::Result<Vec<_>>>()?;
            let sep = g.d_separated(&[id(x)?], &[id(y)?], &zs)?;
            let body = json!({"x": x, "y": y, "given": given, "d_separated": sep});
            Ok(Response::verdict(body, sep))
        }
        Command::Embed { dag, output } => {
            let g = load_dag(dag)?;
            let emb = embed_dag(&g, limits)?;
            let file = emb.to_space_file();
            match output {
                None => Ok(Response::ok(serde_json::to_value(&file).expect("space file serializes"))),
                Some(path) => {
                    fs::write(path, file.to_json()).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    Ok(Response::ok(json!({
                        "output": path.display().to_string(),
                        "factors": emb.space.num_factors(),
                        "outcomes": emb.space.outcome_count(),
                        "variables": file.variables.keys().collect::<Vec<_>>(),
                    })))
                }
            }
        }
        Command::Verify {
            space,
            x,
            y,
            given,
            samples,
            seed,
            budget,
        } => {
            let m = load_model(space, limits)?;
            let (xv, yv, z) = (m.resolve(x)?, m.resolve(y)?, m.resolve_tuple(given)?);
            let verdict = structurally_independent(&m.space, &xv, &yv, &z)?;
            let overlaps = per_block(&m.space, &z, &verdict.overlaps);
            if verdict.independent {
                let rep = verify_soundness(&m.space, &xv, &yv, &z, *samples, *seed)?;
                let passed = rep.violations.is_empty();
                let body = json!({
                    "structural": true,
                    "mode": "soundness",
                    "samples": rep.samples,
                    "held": rep.held,
                    "violations": rep.violations,
                    "passed": passed,
                });
                Ok(Response::verdict(body, passed))
            } else {
                let w = find_witness(&m.space, &xv, &yv, &z, *budget, *seed)?;
                let found = w.is_some();
                let body = json!({
                    "structural": false,
                    "mode": "witness",
                    "overlaps": overlaps,
                    "budget": budget,
                    "witness": w.map(|w| witness_json(&w)),
                    "passed": found,
                });
                Ok(Response::verdict(body, found))
            }
        }
        Command::Witness {
            space,
            x,
            y,
            given,
            budget,
            seed,
        } => {
            let m = load_model(space, limits)?;
            let (xv, yv, z) = (m.resolve(x)?, m.resolve(y)?, m.resolve_tuple(given)?);
            if structurally_independent(&m.space, &xv, &yv, &z)?.independent {
                let body = json!({"structural": true, "witness": null});
                return Ok(Response::verdict(body, false));
            }
            let w = find_witness(&m.space, &xv, &yv, &z, *budget, *seed)?;
            let found = w.is_some();
            let body = json!({
                "structural": false,
                "budget": budget,
                "witness": w.map(|w| witness_json(&w)),
            });
            Ok(Response::verdict(body, found))
        }
        Command::Axioms {
            seed,
            iters,
            max_factors,
            max_domain,
            samples,
            witness_budget,
            perturbation_budget,
            suites,
        } => {
            let cfg = SuiteConfig {
                seed: *seed,
                iterations: *iters,
                max_factors: *max_factors,
                max_domain: *max_domain,
                sample_count: *samples,
                witness_budget: *witness_budget,
                perturbation_budget: *perturbation_budget,
            };
            let suites = if suites.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suites.clone()
            };
            let report = run_suites(&cfg, &suites)?;
            let passed = report.passed();
            let body = json!({
                "config": cfg,
                "suites": suites.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "passed": passed,
                "report": report,
            });
            Ok(Response::verdict(body, passed))
        }
        Command::Atoms { space, given } => {
            let m = load_model(space, limits)?;
            let z = m.resolve_tuple(given)?;
            let mut out = Map::new();
            for (v, c) in m.space.blocks_of(&z)? {
                let a = disintegration_atoms(&m.space, &c)?;
                out.insert(
                    z.label(v).to_string(),
                    json!({
                        "atoms": a.atoms.iter().map(|&s| names(&m.space, s)).collect::<Vec<_>>(),
                        "trivial": names(&m.space, a.trivial),
                    }),
                );
            }
            Ok(Response::ok(Value::Object(out)))
        }
    }
}

fn witness_json(w: &facthist::distributions::Witness) -> Value {
    json!({
        "try_index": w.try_index,
        "seed": w.seed,
        "distribution": DistributionFile::from(&w.distribution),
        "violation": w.report.first_violation,
    })
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Indented `key: value` rendering; arrays of scalars print as `{a, b}`.
fn render_text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Array(items) if items.iter().all(is_scalar) => {
                        let joined: Vec<String> = items.iter().map(scalar).collect();
                        out.push_str(&format!("{pad}{k}: {{{}}}\n", joined.join(", ")));
                    }
                    Value::Object(m) if m.is_empty() => out.push_str(&format!("{pad}{k}: (none)\n")),
                    v if is_scalar(v) => out.push_str(&format!("{pad}{k}: {}\n", scalar(v))),
                    _ => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(val, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_scalar(item) {
                    out.push_str(&format!("{pad}- {}\n", scalar(item)));
                } else if item.as_array().is_some_and(|a| a.iter().all(is_scalar)) {
                    let joined: Vec<String> = item.as_array().unwrap().iter().map(scalar).collect();
                    out.push_str(&format!("{pad}- {{{}}}\n", joined.join(", ")));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(item, depth + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}
