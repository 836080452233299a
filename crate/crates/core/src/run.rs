//! Turning a scenario into results on disk.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::action::{ActionError, ActionSet};
use crate::cost::{CostError, CostModel};
use crate::graph::{enumerate_paths, load_network, GraphError, NetworkInstance, PathSet};
use crate::policy::{DseeStructure, PolicyContext, PolicyError, PreparedPolicy};
use crate::scenario::Scenario;
use crate::sim::{log_checkpoints, run_replications, AggregateResult, Environment, SimError};
use crate::spanner::{build_spanner, BarycentricSpanner, SpannerError};

pub const SEED_ENV: &str = "SPANROUTE_SEED";
pub const CSV_HEADER: &str = "t,mean_cum_regret,std_cum_regret,replications,policy";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Network(#[from] GraphError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("spanner: {0}")]
    Spanner(#[from] SpannerError),
    #[error("policy {policy}: {source}")]
    Policy {
        policy: String,
        #[source]
        source: PolicyError,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid {name}: {reason}")]
    InvalidOption { name: String, reason: String },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for replications; `None` uses all cores.
    pub jobs: Option<usize>,
    /// Replaces the log-spaced checkpoints.
    pub checkpoints: Option<Vec<u64>>,
}

/// Everything derived from a scenario before simulation starts.
#[derive(Debug)]
pub struct Problem {
    pub network: NetworkInstance,
    pub paths: PathSet,
    pub spanner: BarycentricSpanner,
    pub structure: Arc<DseeStructure>,
    pub env: Environment,
    pub policies: Vec<PreparedPolicy>,
}

impl Problem {
    pub fn build(scenario: &Scenario) -> Result<Self, RunError> {
        let network = load_network(&scenario.network)?;
        let paths = enumerate_paths(&network)?;
        let actions = ActionSet::from_paths(&paths);
        let spanner = build_spanner(actions.vectors(), paths.dimension, scenario.spanner_c)?;
        let structure = Arc::new(DseeStructure::from_spanner(&spanner, &actions)?);
        let declared_q = scenario.policies.iter().find_map(|p| match p {
            crate::policy::PolicySpec::DseeHeavy { q, .. } => Some(*q),
            _ => None,
        });
        let model = CostModel::new(scenario.dists.clone(), declared_q)?;
        let env = Environment::new(actions, model)?;
        let policies = scenario
            .policies
            .iter()
            .map(|spec| {
                let ctx = PolicyContext {
                    actions: env.actions(),
                    model: env.model(),
                    structure: Arc::clone(&structure),
                    optimal: env.optimal(),
                };
                spec.prepare(&ctx).map_err(|source| RunError::Policy {
                    policy: spec.name().to_string(),
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            network,
            paths,
            spanner,
            structure,
            env,
            policies,
        })
    }

    /// Commented description of the resolved problem.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let best = self.env.optimal();
        let _ = writeln!(
            s,
            "# network: {} vertices on s-r paths, {} edges, {} paths, dimension {}",
            self.network.vertex_count(),
            self.network.edge_count(),
            self.paths.len(),
            self.paths.dimension
        );
        let _ = writeln!(
            s,
            "# best path: {} {} (mean {}, gap {})",
            best,
            self.paths.paths[best],
            self.env.action_means()[best],
            self.env.gap()
        );
        let _ = writeln!(s, "# spanner basis ids: {:?}", self.structure.basis_ids());
        for p in &self.policies {
            let _ = writeln!(s, "# {}: {}", p.name(), p.resolved().join(", "));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct PolicyOutcome {
    pub aggregate: AggregateResult,
    /// Path played most often, summed over replications.
    pub most_played: usize,
    pub mean_realized_regret: f64,
}

#[derive(Debug)]
pub struct RunReport {
    pub problem: Problem,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub outcomes: Vec<PolicyOutcome>,
}

/// Seeds after applying the `SPANROUTE_SEED` override, if set.
pub fn effective_seeds(scenario: &Scenario) -> Result<Vec<u64>, RunError> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => {
            let base: u64 = raw.trim().parse().map_err(|_| RunError::InvalidOption {
                name: SEED_ENV.into(),
                reason: format!("`{raw}` is not a nonnegative integer"),
            })?;
            Ok(scenario.seeds.with_base(base).to_vec())
        }
        Err(_) => Ok(scenario.seeds.to_vec()),
    }
}

/// Simulates every policy in the scenario. Writes nothing.
pub fn simulate(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, RunError> {
    let problem = Problem::build(scenario)?;
    let seeds = effective_seeds(scenario)?;
    let horizon = scenario.horizon;
    let checkpoints = match &options.checkpoints {
        Some(list) => {
            let mut cps: Vec<u64> = list.iter().copied().filter(|&t| t >= 1 && t <= horizon).collect();
            cps.sort_unstable();
            cps.dedup();
            if cps.is_empty() {
                return Err(RunError::InvalidOption {
                    name: "checkpoints".into(),
                    reason: format!("no checkpoint lies in 1..={horizon}"),
                });
            }
            cps
        }
        None => log_checkpoints(horizon),
    };
    if options.jobs == Some(0) {
        return Err(RunError::InvalidOption {
            name: "jobs".into(),
            reason: "must be at least 1".into(),
        });
    }

    let n_actions = problem.env.actions().len();
    let mut outcomes = Vec::with_capacity(problem.policies.len());
    for policy in &problem.policies {
        let per_rep = run_replications(&problem.env, policy, horizon, &seeds, options.jobs, |trace| {
            let values: Vec<f64> = checkpoints.iter().map(|&t| trace.cumulative_at(t)).collect();
            let mut plays = vec![0u64; n_actions];
            for step in &trace.steps {
                plays[step.action] += 1;
            }
            (values, plays, trace.realized_regret)
        })?;
        let values: Vec<Vec<f64>> = per_rep.iter().map(|r| r.0.clone()).collect();
        let mut plays = vec![0u64; n_actions];
        for (_, p, _) in &per_rep {
            for (total, x) in plays.iter_mut().zip(p) {
                *total += x;
            }
        }
        let most_played = plays
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mean_realized_regret = per_rep.iter().map(|r| r.2).sum::<f64>() / per_rep.len() as f64;
        outcomes.push(PolicyOutcome {
            aggregate: AggregateResult::from_values(policy.name(), &checkpoints, &values),
            most_played,
            mean_realized_regret,
        });
    }
    Ok(RunReport {
        problem,
        horizon,
        seeds,
        outcomes,
    })
}

pub fn format_csv(result: &AggregateResult) -> String {
    let mut s = String::with_capacity(64 * (result.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            s,
            "{},{:.12e},{:.12e},{},{}",
            r.t, r.mean, r.std, r.replications, result.policy
        );
    }
    s
}

pub fn format_summary(report: &RunReport) -> String {
    let p = &report.problem;
    let mut s = String::new();
    let best = p.env.optimal();
    let _ = writeln!(
        s,
        "network: {} vertices, {} edges, {} paths, dimension {}",
        p.network.vertex_count(),
        p.network.edge_count(),
        p.paths.len(),
        p.paths.dimension
    );
    let _ = writeln!(
        s,
        "best path: {} {} mean cost {:.10} gap {:.10}",
        best,
        p.paths.paths[best],
        p.env.action_means()[best],
        p.env.gap()
    );
    let basis: Vec<String> = p
        .structure
        .basis_ids()
        .iter()
        .map(|&id| format!("{id} {}", p.paths.paths[id]))
        .collect();
    let _ = writeln!(s, "spanner basis ids: {}", basis.join("; "));
    let _ = writeln!(s, "horizon: {}", report.horizon);
    let _ = writeln!(s, "replications: {}", report.seeds.len());
    for (policy, out) in p.policies.iter().zip(&report.outcomes) {
        let last = out.aggregate.rows.last();
        let _ = writeln!(s, "policy {}", policy.name());
        let _ = writeln!(s, "  constants: {}", policy.resolved().join(", "));
        if let Some(r) = last {
            let _ = writeln!(
                s,
                "  regret at t = {}: mean {:.10} std {:.10}",
                r.t, r.mean, r.std
            );
        }
        let _ = writeln!(s, "  realized regret at horizon: mean {:.10}", out.mean_realized_regret);
        let _ = writeln!(
            s,
            "  empirical best path (most played): {} {}",
            out.most_played, p.paths.paths[out.most_played]
        );
    }
    s
}

/// Output file for one policy.
pub fn csv_path(prefix: &str, policy: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}_{policy}.csv"))
}

pub fn summary_path(prefix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}_summary.txt"))
}

/// Writes all files or none: every file goes to a temporary in the target
/// directory first and is renamed into place only once all are written.
pub fn write_all_or_nothing(files: &[(PathBuf, String)]) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| RunError::Io { path, source }
    };
    let mut staged = Vec::with_capacity(files.len());
    for (path, contents) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io(path))?;
        tmp.write_all(contents.as_bytes()).map_err(io(path))?;
        tmp.as_file().sync_all().map_err(io(path))?;
        staged.push((tmp, path));
    }
    let mut placed: Vec<&Path> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(path) {
            for p in placed {
                let _ = std::fs::remove_file(p);
            }
            return Err(io(path)(e.error));
        }
        placed.push(path);
    }
    Ok(())
}

/// Simulates the scenario and writes the CSVs and summary. Returns the
/// paths written.
pub fn run_command(scenario: &Scenario, options: &RunOptions) -> Result<Vec<PathBuf>, RunError> {
    let report = simulate(scenario, options)?;
    let mut files: Vec<(PathBuf, String)> = report
        .outcomes
        .iter()
        .map(|o| (csv_path(&scenario.output, &o.aggregate.policy), format_csv(&o.aggregate)))
        .collect();
    files.push((summary_path(&scenario.output), format_summary(&report)));
    write_all_or_nothing(&files)?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Canonical scenario text followed by the resolved problem as comments.
pub fn validate_only(scenario: &Scenario) -> Result<String, RunError> {
    let problem = Problem::build(scenario)?;
    let mut s = scenario.to_text();
    s.push_str(&problem.describe());
    Ok(s)
}

/// Parses a `--checkpoints` list such as `10,100,1000`.
pub fn parse_checkpoints(raw: &str) -> Result<Vec<u64>, RunError> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>().map_err(|_| RunError::InvalidOption {
                name: "checkpoints".into(),
                reason: format!("`{s}` is not a slot index"),
            })
        })
        .collect()
}
