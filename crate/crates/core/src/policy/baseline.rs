//! Reference policies that ignore path dependence, plus the oracle and a
//! uniformly random player.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::dsee::{BasisStat, DseePolicy, DseeStructure};
use super::schedule::ExplorationSchedule;
use super::{argmin, Choice, Phase, Policy, PolicyError};
use crate::cost::policy_rng;

/// Per-path baseline flavours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NaiveVariant {
    /// DSEE with every path as its own arm and `d` replaced by `|P|`.
    Dsee { w: f64 },
    /// UCB1 index adapted to costs: play the smallest `mean - sqrt(2 ln t / pulls)`.
    Ucb,
}

/// Builds a baseline that treats each of `actions` paths as an independent arm.
pub fn make_naive_baseline(
    actions: usize,
    variant: NaiveVariant,
) -> Result<Box<dyn Policy>, PolicyError> {
    if actions < 2 {
        return Err(PolicyError::NotEnoughActions {
            need: 2,
            got: actions,
        });
    }
    Ok(match variant {
        NaiveVariant::Dsee { w } => Box::new(DseePolicy::new(
            "naive-dsee",
            Arc::new(DseeStructure::identity(actions)),
            ExplorationSchedule::Star { w, d: actions },
        )),
        NaiveVariant::Ucb => Box::new(NaiveUcb::new(actions)),
    })
}

#[derive(Debug, Clone)]
pub struct NaiveUcb {
    arms: Vec<BasisStat>,
}

impl NaiveUcb {
    pub fn new(actions: usize) -> Self {
        Self {
            arms: vec![BasisStat::default(); actions],
        }
    }

    pub fn arms(&self) -> &[BasisStat] {
        &self.arms
    }

    pub fn set_arms(&mut self, arms: Vec<BasisStat>) {
        assert_eq!(arms.len(), self.arms.len());
        self.arms = arms;
    }

    /// Lower confidence index at slot `t`; unplayed arms rank first.
    pub fn index(&self, arm: usize, t: u64) -> f64 {
        let s = self.arms[arm];
        if s.pulls == 0 {
            return f64::NEG_INFINITY;
        }
        s.mean - (2.0 * (t as f64).ln() / s.pulls as f64).sqrt()
    }
}

impl Policy for NaiveUcb {
    fn name(&self) -> &str {
        "naive-ucb"
    }

    fn select(&mut self, t: u64) -> Result<Choice, PolicyError> {
        if let Some(arm) = self.arms.iter().position(|s| s.pulls == 0) {
            return Ok(Choice {
                action: arm,
                phase: Phase::Explore,
            });
        }
        let action = argmin((0..self.arms.len()).map(|a| self.index(a, t))).expect("nonempty");
        Ok(Choice {
            action,
            phase: Phase::Exploit,
        })
    }

    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), PolicyError> {
        self.arms[action].record(observed_cost);
        Ok(())
    }
}

/// Always plays the action with the smallest true mean.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    best: usize,
}

impl OraclePolicy {
    pub fn new(best: usize) -> Self {
        Self { best }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn select(&mut self, _t: u64) -> Result<Choice, PolicyError> {
        Ok(Choice {
            action: self.best,
            phase: Phase::Exploit,
        })
    }

    fn update(&mut self, _action: usize, _observed_cost: f64) -> Result<(), PolicyError> {
        Ok(())
    }
}

/// Plays a uniformly random action every slot.
#[derive(Debug, Clone)]
pub struct UniformRandomPolicy {
    actions: usize,
    rng: ChaCha8Rng,
}

impl UniformRandomPolicy {
    pub fn new(actions: usize, seed: u64) -> Self {
        assert!(actions > 0);
        Self {
            actions,
            rng: policy_rng(seed),
        }
    }
}

impl Policy for UniformRandomPolicy {
    fn name(&self) -> &str {
        "uniform-random"
    }

    fn select(&mut self, _t: u64) -> Result<Choice, PolicyError> {
        Ok(Choice {
            action: self.rng.random_range(0..self.actions),
            phase: Phase::Explore,
        })
    }

    fn update(&mut self, _action: usize, _observed_cost: f64) -> Result<(), PolicyError> {
        Ok(())
    }
}
