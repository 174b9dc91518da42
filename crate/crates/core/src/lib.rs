//! Structural independence over finite factored spaces.
//!
//! A factored space is a finite product of factor domains. For a random
//! variable `x` and a conditioning variable `z`, the conditional history
//! assigns to each level set of `z` the smallest set of factors that
//! generates `x` there. Two variables are structurally independent given `z`
//! when their conditional histories are disjoint on every level set, which
//! holds exactly when they are conditionally independent under every
//! product distribution on the factors.
//!
//! Modules:
//! - [`space`]: spaces, outcomes, index sets, variables, blocks
//! - [`history`]: generation, histories, structural independence
//! - [`distributions`]: exact product distributions and CI oracles
//! - [`dag`]: d-separation and the response-function embedding
//! - [`verification`]: seeded generators and property suites
//! - [`formats`]: JSON file formats

pub mod dag;
pub mod distributions;
pub mod error;
pub mod formats;
pub mod history;
pub mod space;
pub mod verification;

pub use dag::{Dag, Embedding, Node, Query};
pub use distributions::{CiReport, PerturbationPair, ProductDistribution, Rational};
pub use error::{Error, Result};
pub use formats::{DagFile, DistributionFile, Model, SpaceFile};
pub use history::{Atoms, ConditionalHistory, IndependenceVerdict};
pub use space::{Block, Factor, FactoredSpace, IndexSet, Limits, Outcome, RandomVariable};
pub use verification::{SuiteConfig, SuiteReport};
