//! Hitting probabilities of the origin for discrete simple random walks.
//!
//! Far from the origin the walk is advanced by `|z|_1 - 1` steps at once
//! (the origin cannot be reached in fewer than `|z|_1` steps), drawing the
//! displacement from its exact multinomial law. In dimension 3 and above,
//! walks that wander off are thinned by Russian roulette at doubling radii:
//! a walk crossing a level survives with probability `2^{2-m}` (the decay of
//! the hitting probability per doubling) and its weight is divided by the
//! same factor, which keeps the estimator unbiased while bounding the work.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::rng::derive_seed;
use crate::stats::{replicate_vec, Estimate};

const LEAP_FROM: i64 = 12;
const ROULETTE_FROM: i64 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Roulette {
    pub first_radius: i64,
    pub survival: f64,
}

impl Roulette {
    /// Survival `2^{2-m}` for walks on `Z^m`, `m >= 3`.
    pub fn for_dim(m: usize, first_radius: i64) -> Option<Self> {
        (m >= 3).then(|| Self { first_radius, survival: 0.5f64.powi(m as i32 - 2) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HitOutcome {
    /// Reached the origin at this step count, with roulette weight.
    Hit { step: u64, weight: f64 },
    /// Ran out of steps before it could reach the origin.
    Censored,
    /// Removed by roulette.
    Killed,
}

fn l1(z: &[i64]) -> i64 {
    z.iter().map(|c| c.abs()).sum()
}

/// Displaces `z` by `k` steps of the simple walk.
fn leap<R: Rng + ?Sized>(z: &mut [i64], k: u64, rng: &mut R) {
    let m = z.len();
    let mut left = k;
    for (axis, c) in z.iter_mut().enumerate() {
        let on_axis = if axis + 1 == m {
            left
        } else {
            Binomial::new(left, 1.0 / (m - axis) as f64).expect("valid").sample(rng)
        };
        left -= on_axis;
        if on_axis > 0 {
            let ups = Binomial::new(on_axis, 0.5).expect("valid").sample(rng) as i64;
            *c += 2 * ups - on_axis as i64;
        }
        if left == 0 {
            break;
        }
    }
}

/// Follows the discrete simple walk from `start` for at most `max_steps`
/// steps until it hits the origin.
pub fn hit_origin<R: Rng + ?Sized>(start: &[i64], max_steps: u64, roulette: Option<Roulette>, rng: &mut R) -> HitOutcome {
    let m = start.len();
    let mut z = start.to_vec();
    let mut n = 0u64;
    let mut weight = 1.0;
    let mut level = roulette.map(|r| r.first_radius.max(1));
    let survival = roulette.map_or(1.0, |r| r.survival);
    loop {
        let r = l1(&z);
        if r == 0 {
            return HitOutcome::Hit { step: n, weight };
        }
        if max_steps - n < r as u64 {
            return HitOutcome::Censored;
        }
        while let Some(lv) = level {
            if r < lv {
                break;
            }
            if rng.random::<f64>() < survival {
                weight /= survival;
                level = Some(lv.saturating_mul(2));
            } else {
                return HitOutcome::Killed;
            }
        }
        if r >= LEAP_FROM {
            let k = (r - 1) as u64;
            leap(&mut z, k, rng);
            n += k;
        } else {
            let axis = rng.random_range(0..m);
            z[axis] += if rng.random::<bool>() { 1 } else { -1 };
            n += 1;
        }
    }
}

/// Censored Monte Carlo hitting estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    /// Weighted hit frequency within the horizon (a lower estimate).
    pub estimate: Estimate,
    /// Horizon in steps.
    pub horizon: u64,
    pub censored_fraction: f64,
    pub killed_fraction: f64,
    /// Local-CLT estimate of the probability mass of hits after the horizon.
    pub tail_bound: f64,
}

impl HittingEstimate {
    /// Estimate capped at 1, the range of a probability.
    pub fn value(&self) -> f64 {
        self.estimate.mean.min(1.0)
    }

    pub fn upper(&self) -> f64 {
        (self.estimate.mean + self.tail_bound).min(1.0)
    }
}

/// Residual mass of returns after `h` steps for the walk on `Z^d`.
pub fn tail_bound(d: usize, h: u64) -> f64 {
    let h = (h.max(2)) as f64;
    match d {
        0 => 0.0,
        1 => (2.0 / (std::f64::consts::PI * h)).sqrt().min(1.0),
        2 => (std::f64::consts::PI / h.ln()).min(1.0),
        _ => {
            let df = d as f64;
            let c = (df / (2.0 * std::f64::consts::PI)).powf(df / 2.0);
            (c * h.powf(1.0 - df / 2.0) / (df / 2.0 - 1.0)).min(1.0)
        }
    }
}

fn estimate_hits(start: &[i64], steps: u64, horizon: u64, roulette: Option<Roulette>, replicas: u64, seed: u64) -> HittingEstimate {
    let acc = replicate_vec(replicas, seed, 3, |rng, _, out| {
        let o = hit_origin(start, steps, roulette, rng);
        out[0] = match o {
            HitOutcome::Hit { weight, .. } => weight,
            _ => 0.0,
        };
        out[1] = f64::from(u8::from(o == HitOutcome::Censored));
        out[2] = f64::from(u8::from(o == HitOutcome::Killed));
    });
    HittingEstimate {
        estimate: acc[0].estimate(),
        horizon,
        censored_fraction: acc[1].mean(),
        killed_fraction: acc[2].mean(),
        tail_bound: tail_bound(start.len(), horizon),
    }
}

/// Return probability `gamma_d` of the simple walk on `Z^d`, censored at
/// `horizon` steps.
pub fn gamma_d(d: usize, horizon: u64, replicas: u64, seed: u64) -> HittingEstimate {
    assert!(d >= 1, "dimension must be positive");
    if horizon == 0 {
        return HittingEstimate {
            estimate: Estimate::exact(0.0),
            horizon,
            censored_fraction: 1.0,
            killed_fraction: 0.0,
            tail_bound: 1.0,
        };
    }
    // By symmetry the first step goes to e_1.
    let mut start = vec![0i64; d];
    start[0] = 1;
    let roulette = Roulette::for_dim(d, ROULETTE_FROM);
    estimate_hits(&start, horizon - 1, horizon, roulette, replicas, derive_seed(seed, 0x6761))
}

/// `Gamma(z)`: probability that the simple walk on `Z^m` started at `z`
/// ever hits the origin, censored at `horizon` steps.
pub fn hitting_prob_gamma(z: &[i64], horizon: u64, replicas: u64, seed: u64) -> HittingEstimate {
    if z.iter().all(|&c| c == 0) {
        return HittingEstimate {
            estimate: Estimate::exact(1.0),
            horizon,
            censored_fraction: 0.0,
            killed_fraction: 0.0,
            tail_bound: 0.0,
        };
    }
    let roulette = Roulette::for_dim(z.len(), (4 * l1(z)).max(ROULETTE_FROM));
    estimate_hits(z, horizon, horizon, roulette, replicas, derive_seed(seed, 0x4761))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;

    #[test]
    fn leap_preserves_parity_and_range() {
        let mut rng = replica_rng(0, 0);
        for _ in 0..1000 {
            let mut z = vec![20, -3, 7];
            leap(&mut z, 29, &mut rng);
            let r = l1(&z);
            assert!(r >= 1 && r <= 59);
            assert_eq!((r - 30).rem_euclid(2), 1);
        }
    }

    #[test]
    fn leap_matches_single_steps_in_distribution() {
        let n = 40_000u64;
        let (mut a, mut b) = (0.0, 0.0);
        let (mut a2, mut b2) = (0.0, 0.0);
        for r in 0..n {
            let mut rng = replica_rng(1, r);
            let mut z = vec![0i64, 0];
            leap(&mut z, 30, &mut rng);
            a += z[0] as f64;
            a2 += (z[0] * z[0]) as f64;
            let mut w = [0i64, 0];
            for _ in 0..30 {
                let axis = rng.random_range(0..2);
                w[axis] += if rng.random::<bool>() { 1 } else { -1 };
            }
            b += w[0] as f64;
            b2 += (w[0] * w[0]) as f64;
        }
        // E z_1 = 0, E z_1^2 = 15 for both.
        assert!((a / n as f64).abs() < 0.1 && (b / n as f64).abs() < 0.1);
        assert!((a2 / n as f64 - 15.0).abs() < 0.5);
        assert!((b2 / n as f64 - 15.0).abs() < 0.5);
    }

    #[test]
    fn origin_is_hit_immediately() {
        let e = hitting_prob_gamma(&[0, 0, 0], 10, 100, 1);
        assert_eq!(e.value(), 1.0);
    }

    #[test]
    fn one_dimensional_walk_is_recurrent() {
        let e = gamma_d(1, 100_000, 4000, 2);
        assert!(e.value() > 0.99);
    }

    #[test]
    fn estimates_are_monotone_in_horizon() {
        let mut prev = 0.0;
        for h in [10, 100, 1000, 10_000] {
            let e = gamma_d(3, h, 2000, 9).estimate.mean;
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn short_horizon_matches_enumeration() {
        // In d = 2, return within 2 steps has probability 1/4.
        let e = gamma_d(2, 2, 100_000, 5);
        assert!((e.estimate.mean - 0.25).abs() < 4.0 * e.estimate.stderr);
        assert!(e.censored_fraction > 0.7);
    }
}
