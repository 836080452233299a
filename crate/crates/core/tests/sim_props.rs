use std::sync::Arc;

use proptest::prelude::*;

use spanroute::action::ActionSet;
use spanroute::cost::{CostModel, CostStreams, EdgeDistribution};
use spanroute::graph::{catalog, enumerate_paths, load_network, NetworkSpec};
use spanroute::policy::{DseeStructure, Growth, PolicyContext, PolicySpec, PreparedPolicy, StarConstants};
use spanroute::sim::{replicate, run_episode, run_replications, Environment};
use spanroute::spanner::build_spanner;

fn setup(net: NetworkSpec, dists: Vec<EdgeDistribution>) -> (Environment, Arc<DseeStructure>) {
    let paths = enumerate_paths(&load_network(&net).unwrap()).unwrap();
    let actions = ActionSet::from_paths(&paths);
    let sp = build_spanner(actions.vectors(), paths.dimension, 1.0).unwrap();
    let st = Arc::new(DseeStructure::from_spanner(&sp, &actions).unwrap());
    (Environment::new(actions, CostModel::light(dists).unwrap()).unwrap(), st)
}

fn prepare(env: &Environment, st: &Arc<DseeStructure>, spec: PolicySpec) -> PreparedPolicy {
    spec.prepare(&PolicyContext {
        actions: env.actions(),
        model: env.model(),
        structure: Arc::clone(st),
        optimal: env.optimal(),
    })
    .unwrap()
}

fn diamond() -> (Environment, Arc<DseeStructure>) {
    setup(
        catalog::diamond(),
        vec![
            EdgeDistribution::Uniform { lo: 0.0, hi: 1.0 },
            EdgeDistribution::Bernoulli { p: 0.4, scale: 1.0 },
            EdgeDistribution::Exponential { rate: 2.0 },
            EdgeDistribution::Bernoulli { p: 0.3, scale: 1.0 },
        ],
    )
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn same_seed_same_trace(seed in any::<u64>(), horizon in 1u64..400) {
        let (env, st) = diamond();
        let p = prepare(&env, &st, PolicySpec::DseeStar(StarConstants::Direct { w: 0.3 }));
        let a = run_episode(&env, p.instantiate(seed).as_mut(), horizon, seed).unwrap();
        let b = run_episode(&env, p.instantiate(seed).as_mut(), horizon, seed).unwrap();
        prop_assert_eq!(&a, &b);
        // cumulative regret is nonnegative and nondecreasing
        prop_assert!(a.cumulative.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(a.cumulative.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn cost_streams_are_reproducible(seed in any::<u64>()) {
        let model = CostModel::new(vec![
            EdgeDistribution::Pareto { alpha: 2.5, scale: 1.0 },
            EdgeDistribution::Exponential { rate: 3.0 },
            EdgeDistribution::Uniform { lo: -1.0, hi: 1.0 },
        ], Some(2.0)).unwrap();
        let mut s1 = CostStreams::new(seed, 3);
        let mut s2 = CostStreams::new(seed, 3);
        for _ in 0..50 {
            let a = model.sample_costs(&mut s1);
            let b = model.sample_costs(&mut s2);
            prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn realized_and_pseudo_regret_agree() {
    let (env, st) = diamond();
    let p = prepare(&env, &st, PolicySpec::DseeStar(StarConstants::Direct { w: 0.2 }));
    let seeds: Vec<u64> = (1000..1200).collect();
    let diffs = run_replications(&env, &p, 2000, &seeds, None, |tr| tr.realized_regret - tr.total_regret()).unwrap();
    let (m, se) = mean_and_se(&diffs);
    assert!(m.abs() <= 3.0 * se, "mean difference {m} vs standard error {se}");
}

#[test]
fn disjoint_seed_batches_agree() {
    let (env, st) = diamond();
    let p = prepare(&env, &st, PolicySpec::DseePrime { growth: Growth::LogLog });
    let batch = |lo: u64| {
        let seeds: Vec<u64> = (lo..lo + 100).collect();
        run_replications(&env, &p, 3000, &seeds, None, |tr| tr.total_regret()).unwrap()
    };
    let (ma, sa) = mean_and_se(&batch(0));
    let (mb, sb) = mean_and_se(&batch(5000));
    let se = (sa * sa + sb * sb).sqrt();
    assert!((ma - mb).abs() <= 4.0 * se.max(1e-9), "{ma} vs {mb} (se {se})");
}

#[test]
fn thread_count_does_not_change_results() {
    let (env, st) = setup(
        catalog::grid(3, 3),
        (0..12).map(|e| EdgeDistribution::Uniform { lo: 0.1 * (e % 4) as f64, hi: 1.0 }).collect(),
    );
    let p = prepare(&env, &st, PolicySpec::NaiveUcb);
    let seeds: Vec<u64> = (0..9).collect();
    let cps = [1, 10, 100, 1000];
    let one = replicate(&env, &p, 1000, &seeds, &cps, Some(1)).unwrap();
    let many = replicate(&env, &p, 1000, &seeds, &cps, Some(4)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn oracle_has_zero_regret_and_uniform_is_linear() {
    let (env, st) = diamond();
    let oracle = prepare(&env, &st, PolicySpec::Oracle);
    let agg = replicate(&env, &oracle, 500, &[1, 2, 3], &[500], None).unwrap();
    assert_eq!(agg.rows[0].mean, 0.0);

    let uniform = PreparedPolicy::uniform_random(env.actions().len());
    let means = env.action_means();
    let expected_per_slot = means.iter().map(|m| m - means[env.optimal()]).sum::<f64>() / means.len() as f64;
    let seeds: Vec<u64> = (0..40).collect();
    let agg = replicate(&env, &uniform, 4000, &seeds, &[4000], None).unwrap();
    let per_slot = agg.rows[0].mean / 4000.0;
    assert!((per_slot - expected_per_slot).abs() < 0.05 * expected_per_slot, "{per_slot} vs {expected_per_slot}");
}

#[test]
fn bounded_chernoff_examples() {
    use rand::SeedableRng;
    // P(|mean of 100 - theta| >= 0.1) against 2 exp(-a 0.01 100)
    for (dist, theta) in [
        (EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }, 0.5),
        (EdgeDistribution::Uniform { lo: 0.0, hi: 2.0 }, 1.0),
    ] {
        let params = dist.concentration().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let trials = 100_000;
        let mut hits = 0;
        for _ in 0..trials {
            let m = (0..100).map(|_| dist.sample(&mut rng)).sum::<f64>() / 100.0;
            if (m - theta).abs() >= 0.1 - 1e-12 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let bound = 2.0 * (-params.a * 0.01 * 100.0f64).exp();
        assert!(freq <= bound, "{dist}: {freq} > {bound}");
    }
    let p = EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }.concentration().unwrap();
    assert!((2.0 * (-p.a * 0.01 * 100.0f64).exp() - 0.2707).abs() < 1e-4);
}
