use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use spanroute::action::{dot, ActionSet};
use spanroute::cost::{CostModel, EdgeDistribution};
use spanroute::graph::{catalog, enumerate_paths, load_network, NetworkSpec};
use spanroute::policy::{
    BasisStat, DseePolicy, DseeStructure, ExplorationSchedule, Phase, Policy, PolicyContext,
    PolicySpec, StarConstants,
};
use spanroute::sim::{run_episode, Environment};
use spanroute::spanner::build_spanner;

fn structure_for(net: &NetworkSpec) -> (ActionSet, Arc<DseeStructure>) {
    let paths = enumerate_paths(&load_network(net).unwrap()).unwrap();
    let actions = ActionSet::from_paths(&paths);
    let sp = build_spanner(actions.vectors(), paths.dimension, 1.0).unwrap();
    let st = Arc::new(DseeStructure::from_spanner(&sp, &actions).unwrap());
    (actions, st)
}

fn networks() -> Vec<NetworkSpec> {
    vec![
        catalog::diamond(),
        catalog::parallel_serial(),
        catalog::wheatstone(),
        catalog::grid(3, 3),
    ]
}

proptest! {
    #[test]
    fn round_robin_stays_balanced(net in 0usize..4, w in 0.01f64..2.0, horizon in 1u64..600, seed in any::<u64>()) {
        let spec = &networks()[net];
        let (actions, st) = structure_for(spec);
        let m = actions.width();
        let env = Environment::new(actions, CostModel::light(vec![EdgeDistribution::Uniform { lo: 0.0, hi: 1.0 }; m]).unwrap()).unwrap();
        let d = st.dimension();
        let mut p = DseePolicy::new("p", st, ExplorationSchedule::Star { w, d });
        let mut streams = spanroute::cost::CostStreams::new(seed, m);
        for t in 1..=horizon {
            let c = p.select(t).unwrap();
            let costs = env.model().sample_costs(&mut streams);
            p.update(c.action, dot(env.actions().get(c.action), &costs)).unwrap();
            let pulls: Vec<u64> = p.basis_stats().iter().map(|s| s.pulls).collect();
            let lo = *pulls.iter().min().unwrap();
            let hi = *pulls.iter().max().unwrap();
            prop_assert!(hi - lo <= 1, "t = {}: {:?}", t, pulls);
        }
    }

    #[test]
    fn exploration_count_tracks_threshold(w in 0.01f64..1.0, horizon in 2u64..3000) {
        let (actions, st) = structure_for(&catalog::parallel_serial());
        let env = Environment::new(actions, CostModel::light(vec![EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }; 4]).unwrap()).unwrap();
        let d = st.dimension() as u64;
        let mut p = DseePolicy::new("p", st, ExplorationSchedule::Star { w, d: d as usize });
        let trace = run_episode(&env, &mut p, horizon, 5).unwrap();
        let count = trace.exploration_count(horizon);
        prop_assert_eq!(count, p.exploration_count());
        let target = d * ((d * d) as f64 * w * (horizon as f64).ln()).ceil() as u64;
        // warm-up guarantees at least d samples; the schedule lags by < d
        let lower = target.min(horizon).saturating_sub(d).max(d.min(horizon));
        prop_assert!(count >= lower && count <= target.max(d) + d, "count {} target {}", count, target);
    }

    #[test]
    fn estimate_matches_least_squares(net in 0usize..4, means in prop::collection::vec(-5.0f64..5.0, 12)) {
        let (actions, st) = structure_for(&networks()[net]);
        let d = st.dimension();
        let mut p = DseePolicy::new("p", Arc::clone(&st), ExplorationSchedule::Star { w: 1.0, d });
        let theta: Vec<f64> = means[..d].to_vec();
        p.set_basis_stats(theta.iter().map(|&mean| BasisStat { mean, pulls: 3 }).collect());

        // minimum-norm edge means consistent with the basis means
        let m = actions.width();
        let b = DMatrix::from_fn(d, m, |i, j| actions.get(st.basis_ids()[i])[j]);
        let gram = &b * b.transpose();
        let y = gram.lu().solve(&DVector::from_column_slice(&theta)).unwrap();
        let edge_means = b.transpose() * y;
        for a in 0..actions.len() {
            let ls: f64 = actions.get(a).iter().zip(edge_means.iter()).map(|(x, e)| x * e).sum();
            let direct: f64 = st.coefficients(a).iter().zip(&theta).map(|(c, t)| c * t).sum();
            prop_assert!((p.estimate(a) - ls).abs() < 1e-8, "action {}: {} vs {}", a, p.estimate(a), ls);
            prop_assert!((p.estimate(a) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_edge_shift_keeps_argmin(theta in prop::collection::vec(0.0f64..2.0, 3), shift in -1.0f64..1.0) {
        // every parallel-serial path has two hops
        let (actions, st) = structure_for(&catalog::parallel_serial());
        let mut p = DseePolicy::new("p", Arc::clone(&st), ExplorationSchedule::Star { w: 1.0, d: 3 });
        p.set_basis_stats(theta.iter().map(|&mean| BasisStat { mean, pulls: 1 }).collect());
        let before: Vec<f64> = (0..actions.len()).map(|a| p.estimate(a)).collect();
        let choice = p.exploit_choice().unwrap();
        // an edge-wise shift of `shift` moves each two-hop basis mean by 2 * shift
        p.set_basis_stats(theta.iter().map(|&mean| BasisStat { mean: mean + 2.0 * shift, pulls: 1 }).collect());
        for (a, b0) in before.iter().enumerate() {
            let row_sum: f64 = st.coefficients(a).iter().sum();
            prop_assert!((p.estimate(a) - (b0 + 2.0 * shift * row_sum)).abs() < 1e-9);
            prop_assert!((row_sum - 1.0).abs() < 1e-9);
        }
        let gaps: Vec<f64> = before.iter().map(|b| b - before[choice]).collect();
        let tie = gaps.iter().enumerate().any(|(a, g)| a != choice && g.abs() < 1e-9);
        if !tie {
            prop_assert_eq!(p.exploit_choice().unwrap(), choice);
        }
    }
}

#[test]
fn naive_explores_every_path_spanner_policy_only_the_basis() {
    for (net, paths, d) in [(catalog::parallel_serial(), 4, 3), (catalog::grid(4, 4), 20, 10)] {
        let (actions, st) = structure_for(&net);
        let m = actions.width();
        let env = Environment::new(actions, CostModel::light(vec![EdgeDistribution::Uniform { lo: 0.0, hi: 1.0 }; m]).unwrap()).unwrap();
        let ctx = PolicyContext {
            actions: env.actions(),
            model: env.model(),
            structure: Arc::clone(&st),
            optimal: env.optimal(),
        };
        let w = 0.05;
        let explored = |spec: PolicySpec| {
            let prepared = spec.prepare(&ctx).unwrap();
            let mut policy = prepared.instantiate(1);
            let trace = run_episode(&env, policy.as_mut(), 3000, 1).unwrap();
            let distinct: BTreeSet<usize> = trace
                .steps
                .iter()
                .filter(|s| s.phase == Phase::Explore)
                .map(|s| s.action)
                .collect();
            (distinct.len(), trace.exploration_count(3000))
        };
        let (star_distinct, star_count) = explored(PolicySpec::DseeStar(StarConstants::Direct { w }));
        let (naive_distinct, naive_count) = explored(PolicySpec::NaiveDsee(StarConstants::Direct { w }));
        assert_eq!(star_distinct, d);
        assert_eq!(naive_distinct, paths);
        assert!(naive_count > star_count, "{naive_count} vs {star_count}");
    }
}

/// Wraps a policy and checks that each observation equals the chosen path's
/// total cost, recomputed from an independent copy of the cost streams.
struct Witness<P> {
    inner: P,
    actions: ActionSet,
    model: CostModel,
    streams: spanroute::cost::CostStreams,
    observed: usize,
}

impl<P: Policy> Policy for Witness<P> {
    fn name(&self) -> &str {
        "witness"
    }

    fn select(&mut self, t: u64) -> Result<spanroute::policy::Choice, spanroute::policy::PolicyError> {
        self.inner.select(t)
    }

    fn update(&mut self, action: usize, observed_cost: f64) -> Result<(), spanroute::policy::PolicyError> {
        let costs = self.model.sample_costs(&mut self.streams);
        let total = dot(self.actions.get(action), &costs);
        assert_eq!(observed_cost.to_bits(), total.to_bits(), "observation is not the path total");
        self.observed += 1;
        self.inner.update(action, observed_cost)
    }
}

#[test]
fn policies_only_see_path_totals() {
    let (actions, st) = structure_for(&catalog::wheatstone());
    let model = CostModel::light(vec![
        EdgeDistribution::Bernoulli { p: 0.3, scale: 1.0 },
        EdgeDistribution::Uniform { lo: 0.0, hi: 2.0 },
        EdgeDistribution::Exponential { rate: 2.0 },
        EdgeDistribution::Bernoulli { p: 0.7, scale: 0.5 },
        EdgeDistribution::Uniform { lo: 0.2, hi: 0.4 },
    ])
    .unwrap();
    let env = Environment::new(actions.clone(), model.clone()).unwrap();
    let seed = 42;
    let mut w = Witness {
        inner: DseePolicy::new("p", st, ExplorationSchedule::Star { w: 0.2, d: 3 }),
        actions,
        streams: spanroute::cost::CostStreams::new(seed, model.len()),
        model,
        observed: 0,
    };
    run_episode(&env, &mut w, 500, seed).unwrap();
    assert_eq!(w.observed, 500);
}
