//! Per-edge cost distributions, seeded sampling and concentration constants.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Exp, Pareto, Uniform};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("invalid {family} parameters: {reason}")]
    InvalidParam {
        family: &'static str,
        reason: String,
    },
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("cannot parse distribution `{0}`")]
    Syntax(String),
    #[error("edge {edge} is heavy-tailed and has no moment-generating function")]
    HeavyTailed { edge: usize },
    #[error("declared moment order q = {q} must exceed 1 and stay below the smallest Pareto shape {min_alpha}")]
    InvalidDeclaredQ { q: f64, min_alpha: f64 },
    #[error("cost model has no edges")]
    Empty,
}

/// Distribution of a single edge cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDistribution {
    /// `scale` with probability `p`, otherwise 0.
    Bernoulli { p: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    /// Pareto with shape `alpha` and minimum value `scale`.
    Pareto { alpha: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Light,
    /// Moments exist up to (but excluding) order `alpha`.
    Heavy { alpha: f64 },
}

impl EdgeDistribution {
    pub fn validate(&self) -> Result<(), CostError> {
        let bad = |family: &'static str, reason: &str| {
            Err(CostError::InvalidParam {
                family,
                reason: reason.to_string(),
            })
        };
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Self::Bernoulli { p, scale } => {
                if !finite(&[p, scale]) || !(0.0..=1.0).contains(&p) {
                    return bad("bernoulli", "p must lie in [0, 1]");
                }
                if scale <= 0.0 {
                    return bad("bernoulli", "scale must be positive");
                }
            }
            Self::Uniform { lo, hi } => {
                if !finite(&[lo, hi]) || lo >= hi {
                    return bad("uniform", "lo must be below hi");
                }
            }
            Self::Exponential { rate } => {
                if !rate.is_finite() || rate <= 0.0 {
                    return bad("exponential", "rate must be positive");
                }
            }
            Self::Pareto { alpha, scale } => {
                if !finite(&[alpha, scale]) || alpha <= 1.0 {
                    return bad("pareto", "alpha must exceed 1 for a finite mean");
                }
                if scale <= 0.0 {
                    return bad("pareto", "scale must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Bernoulli { .. } => "bernoulli",
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::Pareto { .. } => "pareto",
        }
    }

    pub fn tail(&self) -> Tail {
        match *self {
            Self::Pareto { alpha, .. } => Tail::Heavy { alpha },
            _ => Tail::Light,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Bernoulli { p, scale } => p * scale,
            Self::Uniform { lo, hi } => (lo + hi) / 2.0,
            Self::Exponential { rate } => 1.0 / rate,
            Self::Pareto { alpha, scale } => alpha * scale / (alpha - 1.0),
        }
    }

    /// Draws one value. The distribution must have been validated.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Bernoulli { p, scale } => {
                if Bernoulli::new(p).expect("validated").sample(rng) {
                    scale
                } else {
                    0.0
                }
            }
            Self::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
            Self::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            Self::Pareto { alpha, scale } => {
                Pareto::new(scale, alpha).expect("validated").sample(rng)
            }
        }
    }

    /// Conservative sub-Gaussian constants for the centred variable, or
    /// `None` for heavy tails.
    ///
    /// Bounded families use `zeta = (range / 2)^2` (Hoeffding) with `u0 = 1`.
    /// The exponential uses `u0 = rate / 2` and the supremum of the centred
    /// MGF's second derivative over `[-u0, u0]`; that derivative is convex,
    /// so the supremum sits at an endpoint.
    pub fn concentration(&self) -> Option<ConcentrationParams> {
        let (zeta, u0) = match *self {
            Self::Bernoulli { scale, .. } => ((scale / 2.0).powi(2), 1.0),
            Self::Uniform { lo, hi } => (((hi - lo) / 2.0).powi(2), 1.0),
            Self::Exponential { rate } => {
                let u0 = rate / 2.0;
                let zeta = centered_exponential_mgf_second_derivative(rate, -u0)
                    .max(centered_exponential_mgf_second_derivative(rate, u0));
                (zeta, u0)
            }
            Self::Pareto { .. } => return None,
        };
        Some(ConcentrationParams::from_zeta(zeta, u0))
    }
}

/// Second derivative at `u` of `E[exp(u (X - 1/rate))]` for `X ~ Exp(rate)`, `u < rate`.
fn centered_exponential_mgf_second_derivative(rate: f64, u: f64) -> f64 {
    let mu = 1.0 / rate;
    let k = rate - u;
    let g = rate / k;
    let g1 = rate / (k * k);
    let g2 = 2.0 * rate / (k * k * k);
    (-u * mu).exp() * (mu * mu * g - 2.0 * mu * g1 + g2)
}

impl fmt::Display for EdgeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Bernoulli { p, scale } => write!(f, "bernoulli {p} {scale}"),
            Self::Uniform { lo, hi } => write!(f, "uniform {lo} {hi}"),
            Self::Exponential { rate } => write!(f, "exponential {rate}"),
            Self::Pareto { alpha, scale } => write!(f, "pareto {alpha} {scale}"),
        }
    }
}

impl FromStr for EdgeDistribution {
    type Err = CostError;

    /// Parses `bernoulli p scale`, `uniform lo hi`, `exponential rate` or
    /// `pareto alpha scale`, then validates the parameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let family = parts.next().ok_or_else(|| CostError::Syntax(s.to_string()))?;
        let nums: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CostError::Syntax(s.to_string()))?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(CostError::Syntax(s.to_string()))
            }
        };
        let dist = match family {
            "bernoulli" => {
                arity(2)?;
                Self::Bernoulli {
                    p: nums[0],
                    scale: nums[1],
                }
            }
            "uniform" => {
                arity(2)?;
                Self::Uniform {
                    lo: nums[0],
                    hi: nums[1],
                }
            }
            "exponential" => {
                arity(1)?;
                Self::Exponential { rate: nums[0] }
            }
            "pareto" => {
                arity(2)?;
                Self::Pareto {
                    alpha: nums[0],
                    scale: nums[1],
                }
            }
            other => return Err(CostError::UnknownDistribution(other.to_string())),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Constants `(a, zeta, u0)` for which
/// `P(|mean_s - theta| >= delta) <= 2 exp(-a delta^2 s)` holds for
/// `delta in [0, zeta * u0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationParams {
    pub a: f64,
    pub zeta: f64,
    pub u0: f64,
}

impl ConcentrationParams {
    /// Uses the largest admissible `a = 1 / (2 zeta)`.
    pub fn from_zeta(zeta: f64, u0: f64) -> Self {
        Self {
            a: 1.0 / (2.0 * zeta),
            zeta,
            u0,
        }
    }

    /// Largest deviation the bound covers.
    pub fn max_delta(&self) -> f64 {
        self.zeta * self.u0
    }

    /// The bound `2 exp(-a delta^2 s)`.
    pub fn tail_bound(&self, delta: f64, samples: u64) -> f64 {
        2.0 * (-self.a * delta * delta * samples as f64).exp()
    }
}

/// Constants valid for sums of at most `m` edge costs.
pub fn path_concentration(params: ConcentrationParams, m: usize) -> ConcentrationParams {
    let m = m as f64;
    ConcentrationParams {
        a: params.a / m,
        zeta: params.zeta * m,
        u0: params.u0,
    }
}

/// I.i.d.-over-time costs, one distribution per edge (or cost coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    edges: Vec<EdgeDistribution>,
    declared_q: Option<f64>,
}

impl CostModel {
    pub fn new(edges: Vec<EdgeDistribution>, declared_q: Option<f64>) -> Result<Self, CostError> {
        if edges.is_empty() {
            return Err(CostError::Empty);
        }
        for e in &edges {
            e.validate()?;
        }
        let min_alpha = edges
            .iter()
            .filter_map(|e| match e.tail() {
                Tail::Heavy { alpha } => Some(alpha),
                Tail::Light => None,
            })
            .fold(f64::INFINITY, f64::min);
        if let Some(q) = declared_q {
            if !(q > 1.0 && q < min_alpha) {
                return Err(CostError::InvalidDeclaredQ { q, min_alpha });
            }
        }
        Ok(Self { edges, declared_q })
    }

    pub fn light(edges: Vec<EdgeDistribution>) -> Result<Self, CostError> {
        Self::new(edges, None)
    }

    pub fn edges(&self) -> &[EdgeDistribution] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn declared_q(&self) -> Option<f64> {
        self.declared_q
    }

    pub fn is_heavy_tailed(&self) -> bool {
        self.edges.iter().any(|e| matches!(e.tail(), Tail::Heavy { .. }))
    }

    /// Smallest Pareto shape over heavy edges, if any.
    pub fn min_heavy_alpha(&self) -> Option<f64> {
        self.edges
            .iter()
            .filter_map(|e| match e.tail() {
                Tail::Heavy { alpha } => Some(alpha),
                Tail::Light => None,
            })
            .reduce(f64::min)
    }

    pub fn mean_costs(&self) -> Vec<f64> {
        self.edges.iter().map(EdgeDistribution::mean).collect()
    }

    /// Per-edge constants; fails on the first heavy-tailed edge.
    pub fn edge_concentration(&self) -> Result<Vec<ConcentrationParams>, CostError> {
        self.edges
            .iter()
            .enumerate()
            .map(|(edge, d)| d.concentration().ok_or(CostError::HeavyTailed { edge }))
            .collect()
    }

    /// Model-level constants: the elementwise worst case over edges
    /// (largest `zeta`, smallest `u0`).
    pub fn default_concentration(&self) -> Result<ConcentrationParams, CostError> {
        let per_edge = self.edge_concentration()?;
        let zeta = per_edge.iter().map(|p| p.zeta).fold(0.0, f64::max);
        let u0 = per_edge.iter().map(|p| p.u0).fold(f64::INFINITY, f64::min);
        Ok(ConcentrationParams::from_zeta(zeta, u0))
    }

    /// Draws one cost vector, consuming one value from each edge's stream
    /// in edge-id order.
    pub fn sample_costs(&self, streams: &mut CostStreams) -> Vec<f64> {
        let mut out = vec![0.0; self.edges.len()];
        self.sample_into(streams, &mut out);
        out
    }

    pub fn sample_into(&self, streams: &mut CostStreams, out: &mut [f64]) {
        assert_eq!(streams.rngs.len(), self.edges.len(), "stream count mismatch");
        for ((dist, rng), slot) in self.edges.iter().zip(&mut streams.rngs).zip(out) {
            *slot = dist.sample(rng);
        }
    }
}

/// Independent generator per edge: ChaCha8 keyed by the master seed, with the
/// edge id selecting the stream. Adding an edge never changes another edge's
/// draws.
#[derive(Debug, Clone)]
pub struct CostStreams {
    rngs: Vec<ChaCha8Rng>,
}

impl CostStreams {
    pub fn new(seed: u64, edges: usize) -> Self {
        let rngs = (0..edges as u64)
            .map(|e| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(e);
                rng
            })
            .collect();
        Self { rngs }
    }

    pub fn stream(&mut self, edge: usize) -> &mut ChaCha8Rng {
        &mut self.rngs[edge]
    }
}

/// Generator for policy-internal randomness, disjoint from every edge stream.
pub fn policy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn degenerate_bernoulli_is_constant() {
        let model = CostModel::light(vec![EdgeDistribution::Bernoulli { p: 1.0, scale: 2.0 }]).unwrap();
        let mut s = CostStreams::new(3, 1);
        for _ in 0..100 {
            assert_eq!(model.sample_costs(&mut s), vec![2.0]);
        }
    }

    #[test]
    fn narrow_uniform_stays_in_support() {
        for eps in [1e-1, 1e-4, 1e-9] {
            let d = EdgeDistribution::Uniform { lo: 3.0, hi: 3.0 + eps };
            let mut s = CostStreams::new(11, 1);
            for _ in 0..1000 {
                let x = d.sample(s.stream(0));
                assert!((3.0..=3.0 + eps).contains(&x));
            }
        }
    }

    #[test]
    fn analytic_means() {
        assert!(close(EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }.mean(), 0.5));
        assert!(close(EdgeDistribution::Exponential { rate: 4.0 }.mean(), 0.25));
        assert!(close(EdgeDistribution::Pareto { alpha: 3.0, scale: 2.0 }.mean(), 3.0));
        assert!(close(EdgeDistribution::Uniform { lo: 1.0, hi: 4.0 }.mean(), 2.5));
    }

    #[test]
    fn default_concentration_examples() {
        let b = CostModel::light(vec![EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }]).unwrap();
        let c = b.default_concentration().unwrap();
        assert!(close(c.zeta, 0.25) && close(c.a, 2.0) && close(c.u0, 1.0));

        let u = CostModel::light(vec![EdgeDistribution::Uniform { lo: 0.0, hi: 2.0 }]).unwrap();
        let c = u.default_concentration().unwrap();
        assert!(close(c.zeta, 1.0) && close(c.a, 0.5) && close(c.u0, 1.0));

        let p = CostModel::light(vec![EdgeDistribution::Pareto { alpha: 2.0, scale: 1.0 }]).unwrap();
        assert_eq!(p.default_concentration(), Err(CostError::HeavyTailed { edge: 0 }));
    }

    #[test]
    fn exponential_zeta_is_endpoint_supremum() {
        // centred MGF second derivative at u0 = rate/2 equals 10 e^{-1/2} / rate^2
        let rate = 4.0;
        let c = EdgeDistribution::Exponential { rate }.concentration().unwrap();
        assert!(close(c.u0, 2.0));
        let expected = 10.0 * (-0.5f64).exp() / (rate * rate);
        assert!((c.zeta - expected).abs() < 1e-12);
        // variance at u = 0 is below the supremum
        assert!(close(centered_exponential_mgf_second_derivative(rate, 0.0), 1.0 / 16.0));
        for i in 0..=20 {
            let u = -2.0 + 0.2 * i as f64;
            assert!(centered_exponential_mgf_second_derivative(rate, u) <= c.zeta + 1e-12);
        }
    }

    #[test]
    fn model_concentration_is_worst_case() {
        let m = CostModel::light(vec![
            EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 },
            EdgeDistribution::Uniform { lo: 0.0, hi: 4.0 },
            EdgeDistribution::Exponential { rate: 10.0 },
        ])
        .unwrap();
        let c = m.default_concentration().unwrap();
        assert!(close(c.zeta, 4.0));
        assert!(close(c.u0, 1.0));
        assert!(close(c.a, 0.125));
    }

    #[test]
    fn path_concentration_scaling() {
        let p = path_concentration(ConcentrationParams { a: 2.0, zeta: 0.25, u0: 1.0 }, 4);
        assert!(close(p.a, 0.5) && close(p.zeta, 1.0) && close(p.u0, 1.0));
        let q = ConcentrationParams { a: 0.5, zeta: 1.0, u0: 1.0 };
        assert_eq!(path_concentration(q, 1), q);
        let r = path_concentration(q, 5);
        assert!(close(r.a, 0.1) && close(r.zeta, 5.0) && close(r.u0, 1.0));
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            "bernoulli 0.5 1".parse::<EdgeDistribution>().unwrap(),
            EdgeDistribution::Bernoulli { p: 0.5, scale: 1.0 }
        );
        assert_eq!(
            "pareto 2.5 0.3".parse::<EdgeDistribution>().unwrap(),
            EdgeDistribution::Pareto { alpha: 2.5, scale: 0.3 }
        );
        assert!(matches!(
            "pareto 0.9 1".parse::<EdgeDistribution>(),
            Err(CostError::InvalidParam { family: "pareto", .. })
        ));
        assert!(matches!("uniform 2 1".parse::<EdgeDistribution>(), Err(CostError::InvalidParam { .. })));
        assert!(matches!("exponential 0".parse::<EdgeDistribution>(), Err(CostError::InvalidParam { .. })));
        assert!(matches!("bernoulli 1.5 1".parse::<EdgeDistribution>(), Err(CostError::InvalidParam { .. })));
        assert!(matches!("gauss 0 1".parse::<EdgeDistribution>(), Err(CostError::UnknownDistribution(_))));
        assert!(matches!("uniform 1".parse::<EdgeDistribution>(), Err(CostError::Syntax(_))));
        assert!(matches!("uniform a b".parse::<EdgeDistribution>(), Err(CostError::Syntax(_))));
    }

    #[test]
    fn declared_q_must_sit_below_alpha() {
        let edges = vec![
            EdgeDistribution::Pareto { alpha: 2.5, scale: 1.0 },
            EdgeDistribution::Uniform { lo: 0.0, hi: 1.0 },
        ];
        assert!(CostModel::new(edges.clone(), Some(2.0)).is_ok());
        assert!(matches!(
            CostModel::new(edges.clone(), Some(2.5)),
            Err(CostError::InvalidDeclaredQ { .. })
        ));
        assert!(matches!(CostModel::new(edges, Some(1.0)), Err(CostError::InvalidDeclaredQ { .. })));
        let m = CostModel::new(vec![EdgeDistribution::Pareto { alpha: 3.0, scale: 1.0 }], None).unwrap();
        assert!(m.is_heavy_tailed());
        assert_eq!(m.min_heavy_alpha(), Some(3.0));
    }

    #[test]
    fn streams_are_independent_of_edge_count() {
        let d = EdgeDistribution::Uniform { lo: 0.0, hi: 1.0 };
        let small = CostModel::light(vec![d; 2]).unwrap();
        let large = CostModel::light(vec![d; 5]).unwrap();
        let mut s2 = CostStreams::new(42, 2);
        let mut s5 = CostStreams::new(42, 5);
        for _ in 0..50 {
            let a = small.sample_costs(&mut s2);
            let b = large.sample_costs(&mut s5);
            assert_eq!(a[..], b[..2]);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let m = CostModel::light(vec![
            EdgeDistribution::Exponential { rate: 2.0 },
            EdgeDistribution::Bernoulli { p: 0.3, scale: 1.0 },
        ])
        .unwrap();
        let mut a = CostStreams::new(9, 2);
        let mut b = CostStreams::new(9, 2);
        let mut c = CostStreams::new(10, 2);
        let xs: Vec<Vec<f64>> = (0..20).map(|_| m.sample_costs(&mut a)).collect();
        let ys: Vec<Vec<f64>> = (0..20).map(|_| m.sample_costs(&mut b)).collect();
        let zs: Vec<Vec<f64>> = (0..20).map(|_| m.sample_costs(&mut c)).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
