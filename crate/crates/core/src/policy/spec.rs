//! Named policy configurations and their per-problem preparation.

use std::sync::Arc;

use super::baseline::{NaiveUcb, OraclePolicy, UniformRandomPolicy};
use super::constants::{action_concentration, edge_level_w};
use super::dsee::{DseePolicy, DseeStructure};
use super::schedule::{ExplorationSchedule, Growth};
use super::solo::{GapForm, SoloEpochPolicy};
use super::{Policy, PolicyError};
use crate::action::ActionSet;
use crate::cost::{ConcentrationParams, CostModel};

/// Policy names accepted in scenario files.
pub const POLICY_NAMES: [&str; 7] = [
    "dsee-star",
    "dsee-prime",
    "dsee-heavy",
    "solo-epoch",
    "naive-dsee",
    "naive-ucb",
    "oracle",
];

pub const DEFAULT_T0: u64 = 100;

/// How the log-schedule constant `w` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StarConstants {
    Direct { w: f64 },
    /// Derived from `b` and the gap bound `c` with the cost model's
    /// concentration constants.
    FromGap { b: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    DseeStar(StarConstants),
    DseePrime { growth: Growth },
    DseeHeavy { v: f64, q: f64 },
    SoloEpoch { t0: u64, b: f64, gap_form: GapForm },
    NaiveDsee(StarConstants),
    NaiveUcb,
    Oracle,
}

fn invalid(name: &str, reason: impl Into<String>) -> PolicyError {
    PolicyError::InvalidParam {
        name: name.to_string(),
        reason: reason.into(),
    }
}

struct Params<'a> {
    policy: &'a str,
    entries: &'a [(String, String)],
}

impl Params<'_> {
    fn check_allowed(&self, allowed: &[&str]) -> Result<(), PolicyError> {
        for (i, (k, _)) in self.entries.iter().enumerate() {
            if !allowed.contains(&k.as_str()) {
                return Err(invalid(k, format!("not accepted by policy {}", self.policy)));
            }
            if self.entries[..i].iter().any(|(o, _)| o == k) {
                return Err(invalid(k, "given more than once"));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, PolicyError> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| invalid(key, format!("`{raw}` is not a number")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(key, "must be a positive finite number"));
        }
        Ok(Some(v))
    }

    fn star(&self) -> Result<StarConstants, PolicyError> {
        self.check_allowed(&["w", "b", "c"])?;
        let w = self.positive("w")?;
        let b = self.positive("b")?;
        let c = self.positive("c")?;
        match (w, b, c) {
            (Some(w), None, None) => Ok(StarConstants::Direct { w }),
            (None, Some(b), Some(c)) => Ok(StarConstants::FromGap { b, c }),
            (Some(_), _, _) => Err(invalid("w", "give either w or the pair b, c")),
            (None, Some(_), None) => Err(PolicyError::MissingParam("c".into())),
            (None, None, _) => Err(PolicyError::MissingParam("w".into())),
        }
    }
}

fn star_params(s: &StarConstants) -> Vec<(&'static str, String)> {
    match *s {
        StarConstants::Direct { w } => vec![("w", w.to_string())],
        StarConstants::FromGap { b, c } => vec![("b", b.to_string()), ("c", c.to_string())],
    }
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DseeStar(_) => "dsee-star",
            Self::DseePrime { .. } => "dsee-prime",
            Self::DseeHeavy { .. } => "dsee-heavy",
            Self::SoloEpoch { .. } => "solo-epoch",
            Self::NaiveDsee(_) => "naive-dsee",
            Self::NaiveUcb => "naive-ucb",
            Self::Oracle => "oracle",
        }
    }

    /// Builds a policy from its name and `policy_params` entries.
    pub fn from_params(name: &str, entries: &[(String, String)]) -> Result<Self, PolicyError> {
        let p = Params {
            policy: name,
            entries,
        };
        match name {
            "dsee-star" => Ok(Self::DseeStar(p.star()?)),
            "naive-dsee" => Ok(Self::NaiveDsee(p.star()?)),
            "dsee-prime" => {
                p.check_allowed(&["f"])?;
                match p.raw("f").map(str::trim) {
                    None | Some("loglog") => Ok(Self::DseePrime {
                        growth: Growth::LogLog,
                    }),
                    Some(other) => Err(invalid("f", format!("unknown growth sequence `{other}`"))),
                }
            }
            "dsee-heavy" => {
                p.check_allowed(&["v", "q"])?;
                let v = p.positive("v")?.ok_or_else(|| PolicyError::MissingParam("v".into()))?;
                let q = p.positive("q")?.ok_or_else(|| PolicyError::MissingParam("q".into()))?;
                if q <= 1.0 {
                    return Err(invalid("q", "must exceed 1"));
                }
                Ok(Self::DseeHeavy { v, q })
            }
            "solo-epoch" => {
                p.check_allowed(&["t0", "b", "gap"])?;
                let b = p.positive("b")?.ok_or_else(|| PolicyError::MissingParam("b".into()))?;
                let t0 = match p.raw("t0") {
                    None => DEFAULT_T0,
                    Some(raw) => raw
                        .trim()
                        .parse::<u64>()
                        .ok()
                        .filter(|&t| t >= 2)
                        .ok_or_else(|| invalid("t0", "must be an integer >= 2"))?,
                };
                let gap_form = match p.raw("gap").map(str::trim) {
                    None => GapForm::default(),
                    Some(raw) => GapForm::from_keyword(raw)
                        .ok_or_else(|| invalid("gap", format!("expected cbrt-log or log-cbrt, got `{raw}`")))?,
                };
                Ok(Self::SoloEpoch { t0, b, gap_form })
            }
            "naive-ucb" => {
                p.check_allowed(&[])?;
                Ok(Self::NaiveUcb)
            }
            "oracle" => {
                p.check_allowed(&[])?;
                Ok(Self::Oracle)
            }
            other => Err(PolicyError::UnknownPolicy(other.to_string())),
        }
    }

    /// Parameters in the form `from_params` accepts.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            Self::DseeStar(s) | Self::NaiveDsee(s) => star_params(s),
            Self::DseePrime { growth } => vec![("f", growth.as_str().to_string())],
            Self::DseeHeavy { v, q } => vec![("v", v.to_string()), ("q", q.to_string())],
            Self::SoloEpoch { t0, b, gap_form } => {
                let mut out = vec![("b", b.to_string()), ("t0", t0.to_string())];
                if *gap_form != GapForm::default() {
                    out.push(("gap", gap_form.keyword().to_string()));
                }
                out
            }
            Self::NaiveUcb | Self::Oracle => Vec::new(),
        }
    }

    /// Resolves constants against a concrete problem.
    pub fn prepare(&self, ctx: &PolicyContext<'_>) -> Result<PreparedPolicy, PolicyError> {
        let name = self.name().to_string();
        let d = ctx.structure.dimension();
        let n = ctx.actions.len();
        let resolve_w = |s: &StarConstants, d: usize| -> Result<f64, PolicyError> {
            match *s {
                StarConstants::Direct { w } => Ok(w),
                StarConstants::FromGap { b, c } => {
                    let params = ctx.model.default_concentration()?;
                    edge_level_w(params, ctx.model.len(), d, b, c)
                }
            }
        };
        let (kind, resolved) = match self {
            Self::DseeStar(s) => {
                let w = resolve_w(s, d)?;
                (
                    Kind::Dsee {
                        structure: Arc::clone(&ctx.structure),
                        schedule: ExplorationSchedule::Star { w, d },
                    },
                    vec![format!("w = {w}"), format!("d = {d}")],
                )
            }
            Self::DseePrime { growth } => (
                Kind::Dsee {
                    structure: Arc::clone(&ctx.structure),
                    schedule: ExplorationSchedule::Prime { growth: *growth, d },
                },
                vec![format!("f = {}", growth.as_str()), format!("d = {d}")],
            ),
            Self::DseeHeavy { v, q } => {
                if let Some(alpha) = ctx.model.min_heavy_alpha() {
                    if *q >= alpha {
                        return Err(invalid(
                            "q",
                            format!("must be below the smallest Pareto shape {alpha}"),
                        ));
                    }
                }
                (
                    Kind::Dsee {
                        structure: Arc::clone(&ctx.structure),
                        schedule: ExplorationSchedule::Heavy { v: *v, q: *q },
                    },
                    vec![format!("v = {v}"), format!("q = {q}"), format!("d = {d}")],
                )
            }
            Self::SoloEpoch { t0, b, gap_form } => {
                let per_coordinate = ctx.model.edge_concentration()?;
                let params = action_concentration(&per_coordinate, ctx.actions);
                // validates b and t0
                SoloEpochPolicy::new(Arc::clone(&ctx.structure), params, *b, *t0, *gap_form)?;
                (
                    Kind::Solo {
                        structure: Arc::clone(&ctx.structure),
                        params,
                        b: *b,
                        t0: *t0,
                        gap_form: *gap_form,
                    },
                    vec![
                        format!("a = {}", params.a),
                        format!("zeta = {}", params.zeta),
                        format!("u0 = {}", params.u0),
                        format!("d = {d}"),
                    ],
                )
            }
            Self::NaiveDsee(s) => {
                if n < 2 {
                    return Err(PolicyError::NotEnoughActions { need: 2, got: n });
                }
                let w = resolve_w(s, n)?;
                (
                    Kind::Dsee {
                        structure: Arc::new(DseeStructure::identity(n)),
                        schedule: ExplorationSchedule::Star { w, d: n },
                    },
                    vec![format!("w = {w}"), format!("arms = {n}")],
                )
            }
            Self::NaiveUcb => {
                if n < 2 {
                    return Err(PolicyError::NotEnoughActions { need: 2, got: n });
                }
                (Kind::Ucb { arms: n }, vec![format!("arms = {n}")])
            }
            Self::Oracle => (Kind::Oracle { best: ctx.optimal }, vec![format!("action = {}", ctx.optimal)]),
        };
        Ok(PreparedPolicy {
            name,
            kind,
            resolved,
        })
    }
}

/// What a policy needs to know about the problem before it starts.
#[derive(Debug, Clone)]
pub struct PolicyContext<'a> {
    pub actions: &'a ActionSet,
    pub model: &'a CostModel,
    pub structure: Arc<DseeStructure>,
    /// Id of the action with the smallest true mean (used by the oracle only).
    pub optimal: usize,
}

#[derive(Debug, Clone)]
enum Kind {
    Dsee {
        structure: Arc<DseeStructure>,
        schedule: ExplorationSchedule,
    },
    Solo {
        structure: Arc<DseeStructure>,
        params: ConcentrationParams,
        b: f64,
        t0: u64,
        gap_form: GapForm,
    },
    Ucb {
        arms: usize,
    },
    Oracle {
        best: usize,
    },
    Uniform {
        actions: usize,
    },
}

/// A policy with all constants resolved; creates fresh state per replication.
#[derive(Debug, Clone)]
pub struct PreparedPolicy {
    name: String,
    kind: Kind,
    resolved: Vec<String>,
}

impl PreparedPolicy {
    pub fn uniform_random(actions: usize) -> Self {
        Self {
            name: "uniform-random".into(),
            kind: Kind::Uniform { actions },
            resolved: vec![format!("arms = {actions}")],
        }
    }

    /// Wraps an explicit DSEE structure and schedule.
    pub fn dsee(
        name: impl Into<String>,
        structure: Arc<DseeStructure>,
        schedule: ExplorationSchedule,
    ) -> Self {
        Self {
            name: name.into(),
            kind: Kind::Dsee {
                structure,
                schedule,
            },
            resolved: vec![format!("{schedule:?}")],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Human-readable resolved constants.
    pub fn resolved(&self) -> &[String] {
        &self.resolved
    }

    /// Exploration schedule for DSEE-type policies.
    pub fn schedule(&self) -> Option<ExplorationSchedule> {
        match &self.kind {
            Kind::Dsee { schedule, .. } => Some(*schedule),
            _ => None,
        }
    }

    /// Fresh policy state for one replication.
    pub fn instantiate(&self, seed: u64) -> Box<dyn Policy> {
        match &self.kind {
            Kind::Dsee {
                structure,
                schedule,
            } => Box::new(DseePolicy::new(self.name.clone(), Arc::clone(structure), *schedule)),
            Kind::Solo {
                structure,
                params,
                b,
                t0,
                gap_form,
            } => Box::new(
                SoloEpochPolicy::new(Arc::clone(structure), *params, *b, *t0, *gap_form)
                    .expect("validated at prepare"),
            ),
            Kind::Ucb { arms } => Box::new(NaiveUcb::new(*arms)),
            Kind::Oracle { best } => Box::new(OraclePolicy::new(*best)),
            Kind::Uniform { actions } => Box::new(UniformRandomPolicy::new(*actions, seed)),
        }
    }
}
