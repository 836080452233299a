//! Online shortest-path routing under unknown stochastic link costs.
//!
//! The learner picks one source-to-destination path per slot and only sees
//! the total cost of that path. Policies explore a small set of basis paths
//! (a barycentric spanner of the path set) on a deterministic schedule and
//! otherwise route on the path that looks cheapest given the basis estimates.
//!
//! Layout:
//! - [`graph`]: networks, path enumeration and path dimension
//! - [`spanner`]: barycentric spanner construction
//! - [`cost`]: edge cost distributions and concentration constants
//! - [`policy`]: DSEE-style policies, epoch variant and baselines
//! - [`sim`]: episodes, regret and replication
//! - [`scenario`] and [`run`]: the scenario file format and the CLI plumbing

// `!(x > y)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod cost;
pub mod graph;
pub mod policy;
pub mod rank;
pub mod run;
pub mod scenario;
pub mod sim;
pub mod spanner;

pub use action::ActionSet;
pub use cost::{CostModel, EdgeDistribution};
pub use graph::{enumerate_paths, load_network, NetworkSpec, PathSet};
pub use policy::{Policy, PolicySpec, PreparedPolicy};
pub use scenario::{parse_scenario, Scenario};
pub use sim::{replicate, run_episode, Environment};
pub use spanner::{build_spanner, BarycentricSpanner};
