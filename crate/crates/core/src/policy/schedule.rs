//! Deterministic exploration schedules.
//!
//! A slot `t > 1` joins the exploration sequence when the number of
//! exploration slots so far is below the schedule's threshold at `t`. Slot 1
//! always explores. Logarithms are natural.

/// 1-based cyclic index `((k - 1) mod l) + 1`.
pub fn oslash(k: u64, l: u64) -> u64 {
    assert!(k >= 1 && l >= 1, "oslash needs positive arguments");
    (k - 1) % l + 1
}

/// Slowly growing sequence used by the constant-free schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    /// `max(1, ln ln t)`
    LogLog,
}

impl Growth {
    pub fn eval(&self, t: u64) -> f64 {
        match self {
            Growth::LogLog => {
                let v = (t as f64).ln().ln();
                if v.is_nan() {
                    1.0
                } else {
                    v.max(1.0)
                }
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Growth::LogLog => "loglog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExplorationSchedule {
    /// Threshold `d * ceil(d^2 * w * ln t)`.
    Star { w: f64, d: usize },
    /// Threshold `d * ceil(f(t) * ln t)`.
    Prime { growth: Growth, d: usize },
    /// Threshold `v * t^(1/q)`.
    Heavy { v: f64, q: f64 },
}

impl ExplorationSchedule {
    /// Number of exploration slots the schedule wants by slot `t`.
    pub fn threshold(&self, t: u64) -> f64 {
        let lt = (t as f64).ln();
        match *self {
            Self::Star { w, d } => {
                let d = d as f64;
                d * (d * d * w * lt).ceil()
            }
            Self::Prime { growth, d } => d as f64 * (growth.eval(t) * lt).ceil(),
            Self::Heavy { v, q } => v * (t as f64).powf(1.0 / q),
        }
    }

    /// Whether slot `t >= 2` explores given `count_so_far` earlier
    /// exploration slots.
    pub fn in_exploration(&self, t: u64, count_so_far: u64) -> bool {
        if t <= 1 {
            return true;
        }
        (count_so_far as f64) < self.threshold(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oslash_examples() {
        assert_eq!(oslash(1, 3), 1);
        assert_eq!(oslash(3, 3), 3);
        assert_eq!(oslash(4, 3), 1);
        assert_eq!(oslash(5, 2), 1);
        assert_eq!(oslash(7, 1), 1);
    }

    #[test]
    fn star_threshold_examples() {
        let s = ExplorationSchedule::Star { w: 1.0, d: 2 };
        // 2 * ceil(4 ln 2) = 2 * ceil(2.7726) = 6
        assert_eq!(s.threshold(2), 6.0);
        assert!(s.in_exploration(2, 1));
        assert!(!s.in_exploration(2, 6));
        assert!(s.in_exploration(2, 5));
    }

    #[test]
    fn heavy_threshold_examples() {
        let s = ExplorationSchedule::Heavy { v: 1.0, q: 2.0 };
        assert!(s.in_exploration(100, 9));
        assert!(!s.in_exploration(100, 10));
    }

    #[test]
    fn prime_uses_clipped_loglog() {
        assert_eq!(Growth::LogLog.eval(2), 1.0);
        assert_eq!(Growth::LogLog.eval(15), 1.0); // ln ln 15 = 0.996
        let t = 100_000u64;
        let f = (t as f64).ln().ln();
        assert!((Growth::LogLog.eval(t) - f).abs() < 1e-15);
        let s = ExplorationSchedule::Prime { growth: Growth::LogLog, d: 3 };
        assert_eq!(s.threshold(t), 3.0 * (f * (t as f64).ln()).ceil());
    }

    #[test]
    fn slot_one_always_explores() {
        let s = ExplorationSchedule::Heavy { v: 1e-9, q: 2.0 };
        assert!(s.in_exploration(1, 1000));
    }
}
