//! Epoch-restarted DSEE for stochastic online linear optimization over a
//! finite action set.
//!
//! Epoch `k` lasts `T_k = t0 * 2^k` slots. Each epoch runs a fresh DSEE
//! instance with the log schedule, gap parameter `c_k` shrinking with `T_k`
//! and `w_k = max{b / (d zeta u0)^2, 4 b / c_k^2}`. Estimates are discarded
//! at every epoch boundary.

use std::sync::Arc;

use super::constants::solo_w;
use super::dsee::{DseePolicy, DseeStructure};
use super::schedule::ExplorationSchedule;
use super::{Choice, Policy, PolicyError};
use crate::cost::ConcentrationParams;

/// How the per-epoch gap parameter is computed from the epoch length `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapForm {
    /// `(ln T)^(1/3) / T^(1/3)`
    #[default]
    CubeRootOfLog,
    /// `ln(T^(1/3)) / T^(1/3)`
    LogOfCubeRoot,
}

impl GapForm {
    /// Scenario-file keyword.
    pub fn keyword(&self) -> &'static str {
        match self {
            GapForm::CubeRootOfLog => "cbrt-log",
            GapForm::LogOfCubeRoot => "log-cbrt",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [GapForm::CubeRootOfLog, GapForm::LogOfCubeRoot]
            .into_iter()
            .find(|g| g.keyword() == s)
    }

    pub fn gap(&self, epoch_len: u64) -> f64 {
        let t = epoch_len as f64;
        match self {
            GapForm::CubeRootOfLog => t.ln().cbrt() / t.cbrt(),
            GapForm::LogOfCubeRoot => t.cbrt().ln() / t.cbrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SoloEpochPolicy {
    structure: Arc<DseeStructure>,
    params: ConcentrationParams,
    b: f64,
    t0: u64,
    gap_form: GapForm,
    epoch: u32,
    epoch_start: u64,
    epoch_len: u64,
    inner: DseePolicy,
}

impl SoloEpochPolicy {
    /// `params` must hold for the cost of every action.
    pub fn new(
        structure: Arc<DseeStructure>,
        params: ConcentrationParams,
        b: f64,
        t0: u64,
        gap_form: GapForm,
    ) -> Result<Self, PolicyError> {
        if t0 < 2 {
            return Err(PolicyError::InvalidParam {
                name: "t0".into(),
                reason: "first epoch must last at least 2 slots".into(),
            });
        }
        let inner = Self::epoch_policy(&structure, params, b, t0, gap_form)?;
        Ok(Self {
            structure,
            params,
            b,
            t0,
            gap_form,
            epoch: 0,
            epoch_start: 1,
            epoch_len: t0,
            inner,
        })
    }

    fn epoch_policy(
        structure: &Arc<DseeStructure>,
        params: ConcentrationParams,
        b: f64,
        len: u64,
        gap_form: GapForm,
    ) -> Result<DseePolicy, PolicyError> {
        let d = structure.dimension();
        let w = solo_w(params, d, b, gap_form.gap(len))?;
        Ok(DseePolicy::new(
            "solo-epoch",
            Arc::clone(structure),
            ExplorationSchedule::Star { w, d },
        ))
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn epoch_len(&self) -> u64 {
        self.epoch_len
    }

    /// Length of epoch `k`.
    pub fn epoch_length(t0: u64, k: u32) -> u64 {
        t0.saturating_mul(1u64 << k.min(63))
    }

    pub fn inner(&self) -> &DseePolicy {
        &self.inner
    }
}

impl Policy for SoloEpochPolicy {
    fn name(&self) -> &str {
        "solo-epoch"
    }

    fn select(&mut self, t: u64) -> Result<Choice, PolicyError> {
        while t >= self.epoch_start + self.epoch_len {
            self.epoch_start += self.epoch_len;
            self.epoch += 1;
            self.epoch_len = Self::epoch_length(self.t0, self.epoch);
            self.inner = Self::epoch_policy(
                &self.structure,
                self.params,
                self.b,
                self.epoch_len,
                self.gap_form,
            )?;
        }
        self.inner.select(t - self.epoch_start + 1)
    }

    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), PolicyError> {
        self.inner.update(action, observed_cost)
    }
}
