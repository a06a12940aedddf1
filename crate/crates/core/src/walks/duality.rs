//! Voter-model correlation functions through coalescing random walks.
//!
//! All arguments are macroscopic times; walks run for `t N^2` units of
//! microscopic time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fast1d::sample_slow_walk;
use super::walk::{step_walk, CoalescingPair, FrozenWalk, Space, WalkD};
use crate::error::{Error, Result};
use crate::lattice::{InitialProfile, MembraneRates};
use crate::rng::derive_seed;
use crate::stats::{replicate, replicate_vec, Estimate};

fn check(x: &[i64], space: &Space, rates: &MembraneRates, replicas: u64) -> Result<()> {
    rates.validate()?;
    if replicas == 0 {
        return Err(Error::domain("need at least one replica"));
    }
    if x.is_empty() {
        return Err(Error::domain("empty site"));
    }
    if let Space::Torus(g) = space {
        if !g.contains(x) {
            return Err(Error::domain(format!("site {x:?} outside the box")));
        }
    }
    Ok(())
}

/// Coordinate 1 of the dual walk from `x1` after microscopic time `time`.
fn first_coordinate<R: Rng + ?Sized>(x1: i64, rate: f64, time: f64, space: &Space, rng: &mut R) -> i64 {
    match space {
        Space::Lattice => sample_slow_walk(x1, rate, time, rng),
        Space::Torus(_) => {
            let mut w = WalkD::with_membrane_rate(vec![x1], rate, space.first_axis());
            step_walk(&mut w, time, rng);
            w.coords[0]
        }
    }
}

/// `E[eta_t(x)] = E[rho_0(X_{tN^2} / N)]`. Since `rho_0` depends on `u_1`
/// only, just the first coordinate of the dual walk is simulated.
pub fn one_point_function(
    x: &[i64],
    t: f64,
    rates: &MembraneRates,
    space: &Space,
    profile: &InitialProfile,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    check(x, space, rates, replicas)?;
    profile.validate()?;
    if t < 0.0 {
        return Err(Error::domain("negative time"));
    }
    let n = rates.n_f64();
    let time = t * n * n;
    let rate = rates.membrane_rate();
    let acc = replicate(replicas, derive_seed(seed, 0x6f6e65), |rng, _| {
        profile.at_site(first_coordinate(x[0], rate, time, space, rng), n)
    });
    Ok(acc.estimate())
}

/// Coalescing pair for `eta_t(x)` and `eta_s(y)`: a walker from `x` and a
/// walker from `y` frozen for `(t - s) N^2`.
fn pair(x: &[i64], y: &[i64], t: f64, s: f64, rates: &MembraneRates, space: &Space) -> (CoalescingPair, f64) {
    let n2 = rates.n_f64() * rates.n_f64();
    let walker = WalkD::new(x.to_vec(), rates, space.clone());
    let frozen = FrozenWalk::new(WalkD::new(y.to_vec(), rates, space.clone()), (t - s) * n2);
    (CoalescingPair::new(walker, frozen), t * n2)
}

fn check_pair(x: &[i64], y: &[i64], t: f64, s: f64, rates: &MembraneRates, space: &Space, replicas: u64) -> Result<()> {
    check(x, space, rates, replicas)?;
    check(y, space, rates, replicas)?;
    if x.len() != y.len() {
        return Err(Error::domain("sites of different dimension"));
    }
    if s > t {
        return Err(Error::domain(format!("need s <= t, got s = {s}, t = {t}")));
    }
    if s < 0.0 {
        return Err(Error::domain("negative time"));
    }
    Ok(())
}

/// `E[eta_t(x) eta_s(y)]` for `s <= t`. The walk from `y` is frozen for
/// `(t - s) N^2`; if the pair has coalesced by `t N^2` the product is
/// `rho_0` at the common position, otherwise the product of the two values.
#[allow(clippy::too_many_arguments)]
pub fn two_point_function(
    x: &[i64],
    y: &[i64],
    t: f64,
    s: f64,
    rates: &MembraneRates,
    space: &Space,
    profile: &InitialProfile,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    check_pair(x, y, t, s, rates, space, replicas)?;
    profile.validate()?;
    let n = rates.n_f64();
    let acc = replicate(replicas, derive_seed(seed, 0x74776f), |rng, _| {
        let (mut p, end) = pair(x, y, t, s, rates, space);
        p.run_until(end, rng);
        let a = profile.at_site(p.walker.coords[0], n);
        if p.met {
            a
        } else {
            a * profile.at_site(p.frozen.walk.coords[0], n)
        }
    });
    Ok(acc.estimate())
}

/// Outcome of one meeting-time draw (times in microscopic units, measured
/// from the end of the freeze).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MeetingTime {
    Met(f64),
    Censored,
}

/// First meeting of the walker from `x` and the walker from `y` frozen for
/// `freeze` units of microscopic time, censored `horizon` units after the
/// freeze ends.
#[allow(clippy::too_many_arguments)]
pub fn meeting_time_sample<R: Rng + ?Sized>(
    x: &[i64],
    y: &[i64],
    rates: &MembraneRates,
    space: &Space,
    freeze: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<MeetingTime> {
    check(x, space, rates, 1)?;
    check(y, space, rates, 1)?;
    if !(horizon > 0.0) || freeze < 0.0 {
        return Err(Error::domain("need horizon > 0 and freeze >= 0"));
    }
    let walker = WalkD::new(x.to_vec(), rates, space.clone());
    let frozen = FrozenWalk::new(WalkD::new(y.to_vec(), rates, space.clone()), freeze);
    let mut p = CoalescingPair::new(walker, frozen);
    // Stop as soon as the pair meets.
    let end = freeze + horizon;
    let mut chunk = (horizon / 64.0).max(1.0);
    while p.time < end && !p.met {
        p.run_until((p.time.max(freeze) + chunk).min(end), rng);
        chunk *= 2.0;
    }
    Ok(match p.meet_time {
        Some(m) => MeetingTime::Met(m - freeze),
        None => MeetingTime::Censored,
    })
}

/// Per-neighbor and summed `E[(eta_t(x) - eta_t(y))^2]` over the `2d`
/// lattice neighbors `y` of `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub neighbors: Vec<Vec<i64>>,
    pub per_bond: Vec<Estimate>,
    /// Bond rate of each neighbor pair.
    pub bond_rates: Vec<f64>,
    /// `sum_y E[(eta(x) - eta(y))^2]`.
    pub total: Estimate,
    /// `sum_y xi_{x,y} E[(eta(x) - eta(y))^2]`.
    pub weighted: Estimate,
}

/// Duality estimate of `E[(eta_t(x) - eta_t(y))^2] = E eta(x) + E eta(y) -
/// 2 E[eta(x) eta(y)]`, simulated per replica from one coalescing pair.
pub fn pair_correlation_qv(
    x: &[i64],
    t: f64,
    rates: &MembraneRates,
    space: &Space,
    profile: &InitialProfile,
    replicas: u64,
    seed: u64,
) -> Result<PairCorrelation> {
    check(x, space, rates, replicas)?;
    profile.validate()?;
    if t < 0.0 {
        return Err(Error::domain("negative time"));
    }
    let n = rates.n_f64();
    let mut out = PairCorrelation {
        neighbors: Vec::new(),
        per_bond: Vec::new(),
        bond_rates: Vec::new(),
        total: Estimate::exact(0.0),
        weighted: Estimate::exact(0.0),
    };
    let (mut var_total, mut var_weighted) = (0.0, 0.0);
    for axis in 0..x.len() {
        for dir in [1, -1] {
            let mut y = x.to_vec();
            let rate = match space {
                Space::Lattice => {
                    y[axis] += dir;
                    rates.bond_rate(x, &y)?
                }
                Space::Torus(g) => {
                    if g.len_axis(axis) < 2 {
                        continue;
                    }
                    y[axis] = g.shift(axis, x[axis], dir).0;
                    g.bond_rate(rates, x, &y)?
                }
            };
            let k = out.neighbors.len() as u64;
            let acc = replicate(replicas, derive_seed(seed, 0x7176 + k), |rng, _| {
                let (mut p, end) = pair(x, &y, t, t, rates, space);
                p.run_until(end, rng);
                if p.met {
                    0.0
                } else {
                    let a = profile.at_site(p.walker.coords[0], n);
                    let b = profile.at_site(p.frozen.walk.coords[0], n);
                    a + b - 2.0 * a * b
                }
            });
            let e = acc.estimate();
            out.total.mean += e.mean;
            out.weighted.mean += rate * e.mean;
            var_total += e.stderr * e.stderr;
            var_weighted += (rate * e.stderr).powi(2);
            out.total.samples += e.samples;
            out.neighbors.push(y);
            out.per_bond.push(e);
            out.bond_rates.push(rate);
        }
    }
    out.total.stderr = var_total.sqrt();
    out.weighted.stderr = var_weighted.sqrt();
    out.weighted.samples = out.total.samples;
    Ok(out)
}

/// Probability that the unfrozen coalescing pair from `x` and `y` has met by
/// macroscopic time `t`.
pub fn coalescence_probability(
    x: &[i64],
    y: &[i64],
    t: f64,
    rates: &MembraneRates,
    space: &Space,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    check_pair(x, y, t, t, rates, space, replicas)?;
    let acc = replicate_vec(replicas, derive_seed(seed, 0x636f), 1, |rng, _, o| {
        let (mut p, end) = pair(x, y, t, t, rates, space);
        p.run_until(end, rng);
        o[0] = f64::from(u8::from(p.met));
    });
    Ok(acc[0].estimate())
}
