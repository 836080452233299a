use std::sync::Arc;

use super::schedule::{oslash, ExplorationSchedule};
use super::{argmin, Choice, Phase, Policy, PolicyError};
use crate::action::ActionSet;
use crate::spanner::{BarycentricSpanner, SpannerError};

/// The part of a DSEE policy shared by all replications: which actions are
/// sampled during exploration and how every action's cost is interpolated
/// from them.
#[derive(Debug, Clone, PartialEq)]
pub struct DseeStructure {
    basis_ids: Vec<usize>,
    /// `coefficients[action][slot]`
    coefficients: Vec<Vec<f64>>,
}

impl DseeStructure {
    /// Interpolation over a barycentric spanner of `actions`.
    pub fn from_spanner(
        spanner: &BarycentricSpanner,
        actions: &ActionSet,
    ) -> Result<Self, SpannerError> {
        let coefficients = actions
            .vectors()
            .iter()
            .map(|x| spanner.coefficients(x))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            basis_ids: spanner.basis_ids().to_vec(),
            coefficients,
        })
    }

    /// Every action is its own basis element (independent arms).
    pub fn identity(actions: usize) -> Self {
        let coefficients = (0..actions)
            .map(|i| (0..actions).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            basis_ids: (0..actions).collect(),
            coefficients,
        }
    }

    pub fn basis_ids(&self) -> &[usize] {
        &self.basis_ids
    }

    pub fn dimension(&self) -> usize {
        self.basis_ids.len()
    }

    pub fn action_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self, action: usize) -> &[f64] {
        &self.coefficients[action]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BasisStat {
    pub mean: f64,
    pub pulls: u64,
}

impl BasisStat {
    pub fn record(&mut self, x: f64) {
        self.pulls += 1;
        self.mean += (x - self.mean) / self.pulls as f64;
    }
}

/// Deterministic sequencing of exploration and exploitation over a basis.
///
/// Exploration slots round-robin over the basis elements; exploitation slots
/// play the action whose interpolated mean `Σ a_i θ̄_i` is smallest.
/// Exploitation observations are not used for estimation.
#[derive(Debug, Clone)]
pub struct DseePolicy {
    name: String,
    structure: Arc<DseeStructure>,
    schedule: ExplorationSchedule,
    stats: Vec<BasisStat>,
    exploration_count: u64,
    pending: Option<Pending>,
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Explore { slot: usize },
    Exploit,
}

impl DseePolicy {
    pub fn new(
        name: impl Into<String>,
        structure: Arc<DseeStructure>,
        schedule: ExplorationSchedule,
    ) -> Self {
        let d = structure.dimension();
        Self {
            name: name.into(),
            structure,
            schedule,
            stats: vec![BasisStat::default(); d],
            exploration_count: 0,
            pending: None,
        }
    }

    pub fn schedule(&self) -> &ExplorationSchedule {
        &self.schedule
    }

    pub fn structure(&self) -> &DseeStructure {
        &self.structure
    }

    /// `|A(t)|` after the last `select`.
    pub fn exploration_count(&self) -> u64 {
        self.exploration_count
    }

    pub fn basis_stats(&self) -> &[BasisStat] {
        &self.stats
    }

    /// Overwrites the basis estimates, e.g. to probe the exploitation rule.
    pub fn set_basis_stats(&mut self, stats: Vec<BasisStat>) {
        assert_eq!(stats.len(), self.stats.len());
        self.exploration_count = stats.iter().map(|s| s.pulls).sum();
        self.stats = stats;
    }

    /// Interpolated mean cost of `action`.
    pub fn estimate(&self, action: usize) -> f64 {
        self.structure
            .coefficients(action)
            .iter()
            .zip(&self.stats)
            .map(|(a, s)| a * s.mean)
            .sum()
    }

    /// The exploitation choice under the current estimates.
    pub fn exploit_choice(&self) -> Result<usize, PolicyError> {
        if let Some(slot) = self.stats.iter().position(|s| s.pulls == 0) {
            return Err(PolicyError::ColdStart { slot });
        }
        Ok(argmin((0..self.structure.action_count()).map(|a| self.estimate(a)))
            .expect("action set is nonempty"))
    }

    fn explores_at(&self, t: u64) -> bool {
        // Until every basis element has one sample the estimates are undefined,
        // so exploration is forced regardless of the schedule.
        t <= 1
            || self.exploration_count < self.structure.dimension() as u64
            || self.schedule.in_exploration(t, self.exploration_count)
    }
}

impl Policy for DseePolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&mut self, t: u64) -> Result<Choice, PolicyError> {
        if self.explores_at(t) {
            self.exploration_count += 1;
            let d = self.structure.dimension() as u64;
            let slot = (oslash(self.exploration_count, d) - 1) as usize;
            self.pending = Some(Pending::Explore { slot });
            Ok(Choice {
                action: self.structure.basis_ids[slot],
                phase: Phase::Explore,
            })
        } else {
            let action = self.exploit_choice()?;
            self.pending = Some(Pending::Exploit);
            Ok(Choice {
                action,
                phase: Phase::Exploit,
            })
        }
    }

    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), PolicyError> {
        match self.pending.take() {
            Some(Pending::Explore { slot }) => {
                let expected = self.structure.basis_ids[slot];
                if action != expected {
                    return Err(PolicyError::UnexpectedAction {
                        expected,
                        got: action,
                    });
                }
                self.stats[slot].record(observed_cost);
                Ok(())
            }
            Some(Pending::Exploit) => Ok(()),
            None => Err(PolicyError::NoSelection),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, enumerate_paths, load_network};
    use crate::spanner::build_spanner;

    fn structure_for(spec: crate::graph::NetworkSpec) -> (Arc<DseeStructure>, ActionSet) {
        let ps = enumerate_paths(&load_network(&spec).unwrap()).unwrap();
        let actions = ActionSet::from_paths(&ps);
        let sp = build_spanner(actions.vectors(), actions.dimension(), 1.0).unwrap();
        (Arc::new(DseeStructure::from_spanner(&sp, &actions).unwrap()), actions)
    }

    #[test]
    fn running_mean_updates() {
        let mut s = BasisStat { mean: 2.0, pulls: 1 };
        s.record(4.0);
        assert_eq!(s, BasisStat { mean: 3.0, pulls: 2 });
        let mut f = BasisStat::default();
        f.record(7.5);
        assert_eq!(f, BasisStat { mean: 7.5, pulls: 1 });
    }

    #[test]
    fn exploration_round_robins_over_basis() {
        let (st, _) = structure_for(catalog::diamond());
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Star { w: 1.0, d: 2 });
        let mut picks = Vec::new();
        for t in 1..=5 {
            let c = p.select(t).unwrap();
            assert_eq!(c.phase, Phase::Explore);
            picks.push(c.action);
            p.update(c.action, 1.0).unwrap();
        }
        // fifth exploration slot: oslash(5, 2) = 1 -> first basis element
        assert_eq!(picks, vec![0, 1, 0, 1, 0]);
        assert_eq!(p.exploration_count(), 5);
    }

    #[test]
    fn diamond_exploit_picks_cheaper_basis_path() {
        let (st, _) = structure_for(catalog::diamond());
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Star { w: 1.0, d: 2 });
        p.set_basis_stats(vec![
            BasisStat { mean: 1.0, pulls: 3 },
            BasisStat { mean: 2.0, pulls: 3 },
        ]);
        assert_eq!(p.exploit_choice().unwrap(), 0);
    }

    #[test]
    fn parallel_serial_interpolation() {
        let (st, _) = structure_for(catalog::parallel_serial());
        assert_eq!(st.basis_ids(), &[0, 1, 2]);
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Star { w: 1.0, d: 3 });
        p.set_basis_stats(vec![
            BasisStat { mean: 1.0, pulls: 1 },
            BasisStat { mean: 1.5, pulls: 1 },
            BasisStat { mean: 2.0, pulls: 1 },
        ]);
        let est: Vec<f64> = (0..4).map(|a| p.estimate(a)).collect();
        for (e, x) in est.iter().zip([1.0, 1.5, 2.0, 2.5]) {
            assert!((e - x).abs() < 1e-12, "{est:?}");
        }
        assert_eq!(p.exploit_choice().unwrap(), 0);
    }

    #[test]
    fn exploitation_observations_are_discarded() {
        let (st, _) = structure_for(catalog::diamond());
        // w tiny so exploitation starts right after warm-up
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Star { w: 1e-6, d: 2 });
        for t in 1..=2 {
            let c = p.select(t).unwrap();
            p.update(c.action, 1.0 + t as f64).unwrap();
        }
        let before = p.basis_stats().to_vec();
        let c = p.select(3).unwrap();
        assert_eq!(c.phase, Phase::Exploit);
        p.update(c.action, 100.0).unwrap();
        assert_eq!(p.basis_stats(), &before[..]);
    }

    #[test]
    fn cold_start_and_protocol_errors() {
        let (st, _) = structure_for(catalog::diamond());
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Star { w: 1.0, d: 2 });
        assert_eq!(p.exploit_choice(), Err(PolicyError::ColdStart { slot: 0 }));
        assert_eq!(p.update(0, 1.0), Err(PolicyError::NoSelection));
        let c = p.select(1).unwrap();
        assert_eq!(
            p.update(1 - c.action, 1.0),
            Err(PolicyError::UnexpectedAction {
                expected: c.action,
                got: 1 - c.action
            })
        );
    }

    #[test]
    fn sparse_heavy_schedule_still_warms_up() {
        let (st, _) = structure_for(catalog::parallel_serial());
        let mut p = DseePolicy::new("x", st, ExplorationSchedule::Heavy { v: 0.01, q: 2.0 });
        for t in 1..=3 {
            let c = p.select(t).unwrap();
            assert_eq!(c.phase, Phase::Explore);
            p.update(c.action, 0.0).unwrap();
        }
        assert_eq!(p.select(4).unwrap().phase, Phase::Exploit);
    }

    #[test]
    fn identity_structure() {
        let st = DseeStructure::identity(3);
        assert_eq!(st.basis_ids(), &[0, 1, 2]);
        assert_eq!(st.coefficients(1), &[0.0, 1.0, 0.0]);
    }
}
