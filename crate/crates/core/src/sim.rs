//! Time loop, bandit observation model, regret accounting and replication.

use rayon::prelude::*;
use thiserror::Error;

use crate::action::{dot, ActionSet};
use crate::cost::{CostModel, CostStreams};
use crate::graph::{PathSet, PathVector};
use crate::policy::{Phase, Policy, PolicyError, PreparedPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("policy error at t = {t}: {source}")]
    Policy {
        t: u64,
        #[source]
        source: PolicyError,
    },
    #[error("policy chose action {action} but only {count} exist")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("cost model has {model} coordinates but actions have {actions}")]
    WidthMismatch { model: usize, actions: usize },
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("regret invariant violated: {0}")]
    InvariantViolation(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Smallest-mean action and its gap to the runner-up (0 on a tie).
pub fn best_action(means: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &m) in means.iter().enumerate() {
        if m < means[best] {
            best = i;
        }
    }
    let second = means
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &m)| m)
        .fold(f64::INFINITY, f64::min);
    let gap = if second.is_finite() { second - means[best] } else { 0.0 };
    (best, gap)
}

/// Exact best path by enumeration, with its gap to the second-best path.
pub fn brute_force_best_path(paths: &PathSet, model: &CostModel) -> (PathVector, f64) {
    let edge_means = model.mean_costs();
    let means: Vec<f64> = paths
        .paths
        .iter()
        .map(|p| p.edges.iter().map(|&e| edge_means[e]).sum())
        .collect();
    let (best, gap) = best_action(&means);
    (paths.paths[best].clone(), gap)
}

/// An action set together with the cost process driving it.
#[derive(Debug, Clone)]
pub struct Environment {
    actions: ActionSet,
    model: CostModel,
    action_means: Vec<f64>,
    optimal: usize,
    gap: f64,
}

impl Environment {
    pub fn new(actions: ActionSet, model: CostModel) -> Result<Self, SimError> {
        if actions.width() != model.len() {
            return Err(SimError::WidthMismatch {
                model: model.len(),
                actions: actions.width(),
            });
        }
        let edge_means = model.mean_costs();
        let action_means: Vec<f64> = actions.vectors().iter().map(|x| dot(x, &edge_means)).collect();
        let (optimal, gap) = best_action(&action_means);
        Ok(Self {
            actions,
            model,
            action_means,
            optimal,
            gap,
        })
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    pub fn action_means(&self) -> &[f64] {
        &self.action_means
    }

    pub fn optimal(&self) -> usize {
        self.optimal
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Mean-cost gap of `action` to the optimum.
    pub fn regret_of(&self, action: usize) -> f64 {
        self.action_means[action] - self.action_means[self.optimal]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub action: usize,
    pub phase: Phase,
    pub regret: f64,
}

/// One episode's per-slot choices and pseudo-regret.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub steps: Vec<StepRecord>,
    /// `cumulative[t - 1]` is the pseudo-regret summed over slots `1..=t`.
    pub cumulative: Vec<f64>,
    pub optimal: usize,
    pub horizon: u64,
    pub seed: u64,
    /// Observed cost minus the optimal action's cost on the same draws.
    pub realized_regret: f64,
}

impl RegretTrace {
    pub fn cumulative_at(&self, t: u64) -> f64 {
        assert!(t >= 1 && t <= self.horizon, "t out of range");
        self.cumulative[(t - 1) as usize]
    }

    pub fn total_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Exploration slots up to and including `t`.
    pub fn exploration_count(&self, t: u64) -> u64 {
        self.steps[..t as usize]
            .iter()
            .filter(|s| s.phase == Phase::Explore)
            .count() as u64
    }

    /// Fraction of exploitation slots in `from..=to` that chose the optimal
    /// action, with the number of such slots.
    pub fn exploit_optimal_fraction(&self, from: u64, to: u64) -> (f64, u64) {
        let lo = (from.max(1) - 1) as usize;
        let hi = to.min(self.horizon) as usize;
        let (mut hits, mut total) = (0u64, 0u64);
        for s in &self.steps[lo..hi] {
            if s.phase == Phase::Exploit {
                total += 1;
                if s.action == self.optimal {
                    hits += 1;
                }
            }
        }
        let frac = if total == 0 { f64::NAN } else { hits as f64 / total as f64 };
        (frac, total)
    }
}

/// Runs `policy` for `horizon` slots. Each slot the full cost vector is drawn
/// but the policy only sees the chosen action's total cost.
pub fn run_episode(
    env: &Environment,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
) -> Result<RegretTrace, SimError> {
    if horizon == 0 {
        return Err(SimError::InvalidHorizon);
    }
    let n = env.actions.len();
    let mut streams = CostStreams::new(seed, env.model.len());
    let mut costs = vec![0.0; env.model.len()];
    let mut steps = Vec::with_capacity(horizon as usize);
    let mut cumulative = Vec::with_capacity(horizon as usize);
    let mut total = 0.0f64;
    let mut realized = 0.0f64;
    let best_vec = env.actions.get(env.optimal);

    for t in 1..=horizon {
        let choice = policy
            .select(t)
            .map_err(|source| SimError::Policy { t, source })?;
        if choice.action >= n {
            return Err(SimError::ActionOutOfRange {
                action: choice.action,
                count: n,
            });
        }
        env.model.sample_into(&mut streams, &mut costs);
        let observed = dot(env.actions.get(choice.action), &costs);
        realized += observed - dot(best_vec, &costs);
        policy
            .update(choice.action, observed)
            .map_err(|source| SimError::Policy { t, source })?;

        let regret = env.regret_of(choice.action);
        if !(regret >= 0.0) {
            return Err(SimError::InvariantViolation(format!(
                "negative instantaneous regret {regret} at t = {t}"
            )));
        }
        let next = total + regret;
        if next < total {
            return Err(SimError::InvariantViolation(format!(
                "cumulative regret decreased at t = {t}"
            )));
        }
        total = next;
        steps.push(StepRecord {
            t,
            action: choice.action,
            phase: choice.phase,
            regret,
        });
        cumulative.push(total);
    }
    Ok(RegretTrace {
        steps,
        cumulative,
        optimal: env.optimal,
        horizon,
        seed,
        realized_regret: realized,
    })
}

/// Checkpoints `floor(10^(k/4))` for `k = 0, 1, ...` up to `horizon`,
/// deduplicated, with `horizon` appended if it is not already the last one.
pub fn log_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for k in 0u32.. {
        let whole = 10u64.checked_pow(k / 4);
        let Some(whole) = whole else { break };
        let frac = 10f64.powf((k % 4) as f64 / 4.0);
        let v = if k % 4 == 0 {
            whole
        } else {
            (whole as f64 * frac).floor() as u64
        };
        if v > horizon {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointRow {
    pub t: u64,
    pub mean: f64,
    pub std: f64,
    pub replications: usize,
}

/// Cumulative regret across replications at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub policy: String,
    pub rows: Vec<CheckpointRow>,
}

impl AggregateResult {
    pub fn at(&self, t: u64) -> Option<&CheckpointRow> {
        self.rows.iter().find(|r| r.t == t)
    }

    /// Aggregates per-replication values; `values[rep][checkpoint]`.
    pub fn from_values(policy: &str, checkpoints: &[u64], values: &[Vec<f64>]) -> Self {
        let n = values.len();
        let rows = checkpoints
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let mean = values.iter().map(|v| v[j]).sum::<f64>() / n as f64;
                let std = if n > 1 {
                    let ss: f64 = values.iter().map(|v| (v[j] - mean).powi(2)).sum();
                    (ss / (n - 1) as f64).sqrt()
                } else {
                    0.0
                };
                CheckpointRow {
                    t,
                    mean,
                    std,
                    replications: n,
                }
            })
            .collect();
        Self {
            policy: policy.to_string(),
            rows,
        }
    }
}

/// Runs one episode per seed and maps each trace through `f`. Results are in
/// seed order regardless of how many threads run them.
pub fn run_replications<R, F>(
    env: &Environment,
    policy: &PreparedPolicy,
    horizon: u64,
    seeds: &[u64],
    jobs: Option<usize>,
    f: F,
) -> Result<Vec<R>, SimError>
where
    R: Send,
    F: Fn(&RegretTrace) -> R + Sync,
{
    if seeds.is_empty() {
        return Err(SimError::NoSeeds);
    }
    let one = |&seed: &u64| -> Result<R, SimError> {
        let mut p = policy.instantiate(seed);
        let trace = run_episode(env, p.as_mut(), horizon, seed)?;
        Ok(f(&trace))
    };
    match jobs {
        Some(1) => seeds.iter().map(one).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(|| seeds.par_iter().map(one).collect()),
        None => seeds.par_iter().map(one).collect(),
    }
}

/// Mean and standard deviation of cumulative regret at `checkpoints`.
pub fn replicate(
    env: &Environment,
    policy: &PreparedPolicy,
    horizon: u64,
    seeds: &[u64],
    checkpoints: &[u64],
    jobs: Option<usize>,
) -> Result<AggregateResult, SimError> {
    let cps: Vec<u64> = checkpoints.iter().copied().filter(|&t| t >= 1 && t <= horizon).collect();
    let values = run_replications(env, policy, horizon, seeds, jobs, |trace| {
        cps.iter().map(|&t| trace.cumulative_at(t)).collect::<Vec<f64>>()
    })?;
    Ok(AggregateResult::from_values(policy.name(), &cps, &values))
}
