//! Exact sampler for the one-dimensional slow-bond walk at a fixed time.
//!
//! Write `Y = 1/2 + sgn * (m + 1/2)`. The distance `m` is a simple walk `W`
//! of total rate 2 folded onto `{0, 1, ...}` (`m = W` or `-W - 1`), and the
//! sign flips at rate `r` while `m = 0`, i.e. while `W` is in `{0, -1}`.
//! Given the number of jumps, the holding times of `W` are uniform spacings,
//! so the time spent at `m = 0` is `T * Beta(k, n + 1 - k)` for `k` visits.

use rand::Rng;
use rand_distr::{Beta, Distribution, Poisson};

use crate::lattice::MembraneRates;
use crate::rng::BitSource;

/// Slow-bond walk on `Z`: rate 1 to each neighbor, rate `r` across `0 <-> 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlowWalk1D {
    pub position: i64,
    pub membrane_rate: f64,
}

impl SlowWalk1D {
    pub fn new(position: i64, rates: &MembraneRates) -> Self {
        Self { position, membrane_rate: rates.membrane_rate() }
    }

    /// Position after `time` units of microscopic time.
    pub fn sample_at<R: Rng + ?Sized>(&self, time: f64, rng: &mut R) -> i64 {
        sample_slow_walk(self.position, self.membrane_rate, time, rng)
    }
}

#[inline]
fn at_zero(w: i64) -> bool {
    w == 0 || w == -1
}

/// Runs `steps` fair steps of `W` from `w`, counting visits to `{0, -1}`
/// (including the start). Steps are taken in blocks that cannot reach the
/// set before their last step.
fn walk_and_count<R: Rng + ?Sized>(mut w: i64, steps: u64, bits: &mut BitSource, rng: &mut R) -> (i64, u64) {
    let mut visits = u64::from(at_zero(w));
    let mut left = steps;
    while left > 0 {
        let dist = if w >= 0 { w } else { -w - 1 } as u64;
        let b = dist.clamp(1, 64).min(left) as u32;
        let ups = bits.take(b, rng).count_ones() as i64;
        w += 2 * ups - b as i64;
        left -= b as u64;
        if at_zero(w) {
            visits += 1;
        }
    }
    (w, visits)
}

/// Position at microscopic time `time` of the slow-bond walk started at
/// `start` with slow rate `rate`.
pub fn sample_slow_walk<R: Rng + ?Sized>(start: i64, rate: f64, time: f64, rng: &mut R) -> i64 {
    if time <= 0.0 {
        return start;
    }
    let plus = start >= 1;
    let m0 = if plus { start - 1 } else { -start };
    let n = Poisson::new(2.0 * time).expect("positive mean").sample(rng) as u64;
    let mut bits = BitSource::new();
    let (w, k) = walk_and_count(m0, n, &mut bits, rng);
    let local = if k == 0 {
        0.0
    } else if k == n + 1 {
        time
    } else {
        time * Beta::new(k as f64, (n + 1 - k) as f64).expect("positive shapes").sample(rng)
    };
    let p_flip = -(-2.0 * rate * local).exp_m1() / 2.0;
    let plus = plus ^ (rng.random::<f64>() < p_flip);
    let m = if w >= 0 { w } else { -w - 1 };
    if plus {
        m + 1
    } else {
        -m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use crate::stats::{chi_square_two_sample, collect_samples};
    use crate::walks::{step_walk, Space, WalkD};
    use std::collections::BTreeMap;

    fn histogram(xs: &[i64]) -> BTreeMap<i64, f64> {
        let mut h = BTreeMap::new();
        for &x in xs {
            *h.entry(x).or_insert(0.0) += 1.0;
        }
        h
    }

    /// Two-sample chi-square p-value, fast sampler against Gillespie paths.
    fn agree(start: i64, rate: f64, time: f64) -> f64 {
        let n = 40_000u64;
        let fast = collect_samples(n, 100, |rng, _| sample_slow_walk(start, rate, time, rng));
        let slow = collect_samples(n, 200, |rng, _| {
            let mut w = WalkD::with_membrane_rate(vec![start], rate, Space::Lattice);
            step_walk(&mut w, time, rng);
            w.coords[0]
        });
        let (hf, hs) = (histogram(&fast), histogram(&slow));
        let keys: Vec<i64> = hf.keys().chain(hs.keys()).cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let obs: Vec<f64> = keys.iter().map(|k| hf.get(k).copied().unwrap_or(0.0)).collect();
        let exp: Vec<f64> = keys.iter().map(|k| hs.get(k).copied().unwrap_or(0.0)).collect();
        chi_square_two_sample(&obs, &exp)
    }

    #[test]
    fn fast_sampler_matches_gillespie() {
        for &(start, rate, time) in &[(0, 0.3, 5.0), (1, 0.05, 20.0), (3, 1.0, 4.0), (-2, 2.0, 10.0), (1, 0.0, 6.0)] {
            let p = agree(start, rate, time);
            assert!(p > 0.001, "start {start} rate {rate} time {time}: p = {p}");
        }
    }

    #[test]
    fn blocked_bond_keeps_side() {
        for r in 0..2000 {
            let mut rng = replica_rng(3, r);
            assert!(sample_slow_walk(1, 0.0, 30.0, &mut rng) >= 1);
            assert!(sample_slow_walk(0, 0.0, 30.0, &mut rng) <= 0);
        }
    }

    #[test]
    fn unit_rate_is_simple_walk_variance() {
        let n = 50_000u64;
        let xs = collect_samples(n, 4, |rng, _| sample_slow_walk(0, 1.0, 25.0, rng) as f64);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Variance 2t; the standard error of a sample variance is about var * sqrt(2/n).
        assert!((var - 50.0).abs() < 4.0 * 50.0 * (2.0 / n as f64).sqrt(), "{var}");
        assert!(mean.abs() < 4.0 * (50.0 / n as f64).sqrt());
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = replica_rng(0, 0);
        assert_eq!(sample_slow_walk(7, 0.1, 0.0, &mut rng), 7);
    }
}
