//! Brownian motion with local time at 0, its reflected and snapping-out
//! variants, and the continuum limit of the dual walk.
//!
//! Conventions: [`sample_bm_with_local_time`], [`sample_b_beta`] and
//! [`snapping_out_expectation`] take the Brownian motion's own time (variance
//! `t`). [`sample_w`], [`feynman_kac`](crate::pde::feynman_kac) and
//! [`invariance_distance`] take macroscopic time and run the Brownian motion
//! for `2t`, matching the generator `Laplacian` of the limit equations.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{MembraneRates, Regime, Side};
use crate::rng::derive_seed;
use crate::stats::{collect_samples, ks_two_sample, replicate, standard_normal_cdf, Estimate};
use crate::walks::sample_slow_walk;

/// Parameters of the limiting one-dimensional process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnappingParams {
    pub alpha: f64,
    pub regime: Regime,
}

impl SnappingParams {
    pub fn new(alpha: f64, regime: Regime) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain("snapping parameter must be finite and nonnegative"));
        }
        Ok(Self { alpha, regime })
    }

    pub fn from_rates(rates: &MembraneRates) -> Self {
        Self { alpha: rates.alpha, regime: rates.regime() }
    }
}

/// A point of `(-inf, 0^-] U [0^+, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedHalfLinePoint {
    pub value: f64,
    pub side: Side,
}

impl SignedHalfLinePoint {
    /// Side read off the sign; 0 needs an explicit side.
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 {
            Ok(Self { value, side: Side::Plus })
        } else if value < 0.0 {
            Ok(Self { value, side: Side::Minus })
        } else {
            Err(Error::domain("the point 0 needs a side label"))
        }
    }

    pub fn with_side(value: f64, side: Side) -> Result<Self> {
        if value * side.sign() < 0.0 {
            return Err(Error::domain(format!("{value} is not on the {side:?} side")));
        }
        Ok(Self { value, side })
    }

    pub fn zero(side: Side) -> Self {
        Self { value: 0.0, side }
    }

    /// The point at distance `r >= 0` from 0 on `side`.
    pub fn on_side(r: f64, side: Side) -> Self {
        Self { value: side.sign() * r, side }
    }
}

/// Terminal value and local time at 0 of a Brownian path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmPathSample {
    /// `B_t`.
    pub terminal: f64,
    /// Local time at 0, normalized so that `|B_t| - L_t` is a martingale.
    pub local_time: f64,
    /// Whether the path reached 0 before `t`.
    pub hit_zero: bool,
}

/// Density of the first hitting time of 0 from distance `a`.
pub fn hitting_density(theta: f64, a: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    a / (2.0 * std::f64::consts::PI).sqrt() * (-a * a / (2.0 * theta)).exp() * theta.powf(-1.5)
}

/// `P(tau <= t) = 2 Phi(-a / sqrt t)`.
pub fn hitting_probability(a: f64, t: f64) -> f64 {
    2.0 * standard_normal_cdf(-a.abs() / t.sqrt())
}

const MAX_PROPOSALS: u32 = 1_000_000;

/// `|B_t|` for Brownian motion from `a > 0` conditioned not to hit 0 by `t`.
/// Rejection from `N(a, t)` against the absorbed kernel
/// `phi_t(x - a) - phi_t(x + a)`, with a fine Euler fallback.
fn sample_avoiding<R: Rng + ?Sized>(a: f64, t: f64, rng: &mut R) -> f64 {
    let sd = t.sqrt();
    for _ in 0..MAX_PROPOSALS {
        let z: f64 = rng.sample(StandardNormal);
        let x = a + sd * z;
        if x > 0.0 && rng.random::<f64>() < -(-2.0 * a * x / t).exp_m1() {
            return x;
        }
    }
    let dt = 1e-4 * t;
    let step = dt.sqrt();
    loop {
        let mut x = a;
        let mut alive = true;
        for _ in 0..10_000 {
            let z: f64 = rng.sample(StandardNormal);
            x += step * z;
            if x <= 0.0 {
                alive = false;
                break;
            }
        }
        if alive {
            return x;
        }
    }
}

/// Exact joint draw of `(B_t, L_t)` for Brownian motion from `u`.
pub fn sample_bm_with_local_time<R: Rng + ?Sized>(u: f64, t: f64, rng: &mut R) -> Result<BmPathSample> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    Ok(draw(u.abs(), u >= 0.0, t, rng))
}

/// `a = |u|`, `up` = start side. Hitting time `tau = a^2 / Z^2`; after it,
/// `(|B|, L)` over the remaining time `s` is `(M - W, M)` with `W` a Brownian
/// motion and `M` its running maximum.
fn draw<R: Rng + ?Sized>(a: f64, up: bool, t: f64, rng: &mut R) -> BmPathSample {
    let tau = if a == 0.0 {
        0.0
    } else {
        let z: f64 = rng.sample(StandardNormal);
        a * a / (z * z)
    };
    let sign = |pos: bool| if pos { 1.0 } else { -1.0 };
    if tau > t {
        let x = sample_avoiding(a, t, rng);
        return BmPathSample { terminal: sign(up) * x, local_time: 0.0, hit_zero: false };
    }
    let s = t - tau;
    let z: f64 = rng.sample(StandardNormal);
    let w = s.sqrt() * z;
    let e = -(1.0 - rng.random::<f64>()).ln();
    let m = (w + (w * w + 2.0 * s * e).sqrt()) / 2.0;
    let abs = (m - w).max(0.0);
    BmPathSample { terminal: sign(rng.random::<bool>()) * abs, local_time: m, hit_zero: true }
}

/// Probability that the snapping-out process switches half-line given local
/// time `l`.
pub fn flip_probability(alpha: f64, l: f64) -> f64 {
    -(-2.0 * alpha * l).exp_m1() / 2.0
}

/// `E_u f(B_t)` for snapping-out Brownian motion: each path of `|B|`
/// contributes `f` on its own side with weight `(1 + e^{-2 alpha L_t})/2` and
/// on the opposite side with the complementary weight.
pub fn snapping_out_expectation<F>(f: F, u: SignedHalfLinePoint, t: f64, alpha: f64, replicas: u64, seed: u64) -> Result<Estimate>
where
    F: Fn(SignedHalfLinePoint) -> f64 + Sync,
{
    if !(t > 0.0) {
        return Err(Error::domain("time must be positive"));
    }
    if replicas == 0 {
        return Err(Error::domain("need at least one replica"));
    }
    let side = u.side;
    let acc = replicate(replicas, derive_seed(seed, 0x736e6170), |rng, _| {
        let p = draw(u.value.abs(), side == Side::Plus, t, rng);
        let r = p.terminal.abs();
        let w_flip = flip_probability(alpha, p.local_time);
        let w_stay = 1.0 - w_flip;
        let stay = f(SignedHalfLinePoint::on_side(r, side));
        let away = f(SignedHalfLinePoint::on_side(r, side.flip()));
        w_stay * stay + w_flip * away
    });
    Ok(acc.estimate())
}

/// `B_{t,beta}` started at `u` after Brownian time `t`.
pub fn sample_b_beta<R: Rng + ?Sized>(u: SignedHalfLinePoint, t: f64, params: &SnappingParams, rng: &mut R) -> SignedHalfLinePoint {
    if t <= 0.0 {
        return u;
    }
    match params.regime {
        Regime::Sub => {
            let z: f64 = rng.sample(StandardNormal);
            let v = u.value + t.sqrt() * z;
            SignedHalfLinePoint { value: v, side: if v > 0.0 { Side::Plus } else { Side::Minus } }
        }
        Regime::Super => {
            let p = draw(u.value.abs(), true, t, rng);
            SignedHalfLinePoint::on_side(p.terminal.abs(), u.side)
        }
        Regime::Critical => {
            let p = draw(u.value.abs(), true, t, rng);
            let flip = rng.random::<f64>() < flip_probability(params.alpha, p.local_time);
            SignedHalfLinePoint::on_side(p.terminal.abs(), if flip { u.side.flip() } else { u.side })
        }
    }
}

/// Point of `R^d` whose first coordinate carries a side label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WPoint {
    pub coords: Vec<f64>,
    pub side: Side,
}

/// `W_{t,beta}(u)`: first coordinate `B_{2t,beta}`, the others independent
/// `B_{2t}`.
pub fn sample_w<R: Rng + ?Sized>(u: &[f64], side: Option<Side>, t: f64, params: &SnappingParams, rng: &mut R) -> Result<WPoint> {
    if u.is_empty() {
        return Err(Error::domain("empty point"));
    }
    let start = match side {
        Some(s) => SignedHalfLinePoint::with_side(u[0], s)?,
        None => SignedHalfLinePoint::new(u[0])?,
    };
    if t < 0.0 {
        return Err(Error::domain("negative time"));
    }
    let first = sample_b_beta(start, 2.0 * t, params, rng);
    let sd = (2.0 * t).sqrt();
    let mut coords = Vec::with_capacity(u.len());
    coords.push(first.value);
    for &c in &u[1..] {
        let z: f64 = rng.sample(StandardNormal);
        coords.push(c + sd * z);
    }
    Ok(WPoint { coords, side: first.side })
}

/// Lattice start site for a macroscopic starting point: `floor(uN)`, with
/// `0^+ -> 1` and `0^- -> 0`.
pub fn start_site(u: SignedHalfLinePoint, n: u64) -> i64 {
    if u.value == 0.0 {
        match u.side {
            Side::Plus => 1,
            Side::Minus => 0,
        }
    } else {
        (u.value * n as f64).floor() as i64
    }
}

/// Two-sample KS distance between `Y_{tN^2}/N` for the slow-bond walk from
/// `floor(uN)` and the continuum `B_{2t,beta}` from `u`.
pub fn invariance_distance(
    u: SignedHalfLinePoint,
    t: f64,
    rates: &MembraneRates,
    params: &SnappingParams,
    replicas: u64,
    seed: u64,
) -> Result<f64> {
    rates.validate()?;
    if replicas < 1000 {
        return Err(Error::domain("need at least 1000 replicas"));
    }
    if !(t > 0.0) {
        return Err(Error::domain("time must be positive"));
    }
    let n = rates.n_f64();
    let x = start_site(u, rates.n);
    let rate = rates.membrane_rate();
    let discrete = collect_samples(replicas, derive_seed(seed, 1), |rng, _| sample_slow_walk(x, rate, t * n * n, rng) as f64 / n);
    let continuum = collect_samples(replicas, derive_seed(seed, 2), |rng, _| sample_b_beta(u, 2.0 * t, params, rng).value);
    Ok(ks_two_sample(&discrete, &continuum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;

    #[test]
    fn remote_start_never_hits() {
        let mut hits = 0;
        for r in 0..10_000 {
            let mut rng = replica_rng(1, r);
            let p = sample_bm_with_local_time(1e6, 1.0, &mut rng).unwrap();
            hits += u32::from(p.local_time > 0.0);
        }
        assert_eq!(hits, 0);
    }

    #[test]
    fn start_at_zero_accumulates_local_time() {
        for r in 0..1000 {
            let mut rng = replica_rng(2, r);
            let p = sample_bm_with_local_time(0.0, 0.5, &mut rng).unwrap();
            assert!(p.local_time > 0.0);
        }
    }

    #[test]
    fn nonpositive_time_rejected() {
        let mut rng = replica_rng(0, 0);
        assert!(sample_bm_with_local_time(1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn terminal_law_is_gaussian() {
        // E B_t = u, E B_t^2 = u^2 + t, E|B_t| - L_t = |u| (Tanaka).
        let n = 100_000u64;
        let (u, t) = (0.4, 1.0);
        let xs = collect_samples(n, 3, |rng, _| sample_bm_with_local_time(u, t, rng).unwrap());
        let m1 = xs.iter().map(|p| p.terminal).sum::<f64>() / n as f64;
        let m2 = xs.iter().map(|p| p.terminal * p.terminal).sum::<f64>() / n as f64;
        let tanaka = xs.iter().map(|p| p.terminal.abs() - p.local_time).sum::<f64>() / n as f64;
        let se = (t / n as f64).sqrt();
        assert!((m1 - u).abs() < 4.0 * se, "{m1}");
        assert!((m2 - (u * u + t)).abs() < 4.0 * 2.0 * se, "{m2}");
        assert!((tanaka - u).abs() < 4.0 * 2.0 * se, "{tanaka}");
    }

    #[test]
    fn mass_is_conserved_exactly() {
        let u = SignedHalfLinePoint::zero(Side::Plus);
        let e = snapping_out_expectation(|_| 1.0, u, 0.7, 1.3, 5000, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn super_regime_keeps_side() {
        let p = SnappingParams::new(1.0, Regime::Super).unwrap();
        for r in 0..2000 {
            let mut rng = replica_rng(5, r);
            let v = sample_b_beta(SignedHalfLinePoint::zero(Side::Plus), 1.0, &p, &mut rng);
            assert!(v.value >= 0.0 && v.side == Side::Plus);
        }
    }

    #[test]
    fn w_needs_side_at_zero() {
        let p = SnappingParams::new(1.0, Regime::Critical).unwrap();
        let mut rng = replica_rng(0, 0);
        assert!(sample_w(&[0.0, 1.0], None, 1.0, &p, &mut rng).is_err());
        assert!(sample_w(&[0.0, 1.0], Some(Side::Minus), 1.0, &p, &mut rng).is_ok());
    }

    #[test]
    fn start_sites() {
        assert_eq!(start_site(SignedHalfLinePoint::zero(Side::Plus), 200), 1);
        assert_eq!(start_site(SignedHalfLinePoint::new(-1.0).unwrap(), 200), -200);
        assert_eq!(start_site(SignedHalfLinePoint::new(0.5).unwrap(), 200), 100);
    }
}
