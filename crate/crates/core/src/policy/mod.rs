//! Path/action selection policies.
//!
//! Every policy sees only the id of the action it played and the scalar
//! total cost of that action. Per-edge costs never cross this interface.

mod baseline;
mod constants;
mod dsee;
mod schedule;
mod solo;
mod spec;

use thiserror::Error;

pub use baseline::{make_naive_baseline, NaiveUcb, NaiveVariant, OraclePolicy, UniformRandomPolicy};
pub use constants::{action_concentration, solo_w, edge_level_w};
pub use dsee::{BasisStat, DseePolicy, DseeStructure};
pub use schedule::{oslash, ExplorationSchedule, Growth};
pub use solo::{GapForm, SoloEpochPolicy};
pub use spec::{PolicyContext, PolicySpec, PreparedPolicy, StarConstants, POLICY_NAMES};

use crate::cost::CostError;
use crate::spanner::SpannerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Explore,
    Exploit,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Explore => "explore",
            Phase::Exploit => "exploit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub action: usize,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("exploitation requested before basis element {slot} was sampled")]
    ColdStart { slot: usize },
    #[error("update for action {got} but the last exploration chose {expected}")]
    UnexpectedAction { expected: usize, got: usize },
    #[error("update called without a preceding select")]
    NoSelection,
    #[error("b = {b} must exceed {bound}")]
    InvalidB { b: f64, bound: f64 },
    #[error("gap bound c = {0} must be positive")]
    InvalidC(f64),
    #[error("missing policy parameter `{0}`")]
    MissingParam(String),
    #[error("invalid policy parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("need at least {need} actions, got {got}")]
    NotEnoughActions { need: usize, got: usize },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Spanner(#[from] SpannerError),
}

/// A sequential action-selection rule.
pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Chooses the action for slot `t` (1-based).
    fn select(&mut self, t: u64) -> Result<Choice, PolicyError>;

    /// Reports the total cost observed for the action chosen by the last
    /// `select`.
    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), PolicyError>;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn select(&mut self, t: u64) -> Result<Choice, PolicyError> {
        (**self).select(t)
    }

    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), PolicyError> {
        (**self).update(action, observed_cost)
    }
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
