//! Growth of the variance of time-integrated boundary sums.
//!
//! Two sites on the plane `x_1 = 0` can only be correlated if their dual
//! walks meet, which needs the transverse difference walk (a simple walk on
//! `Z^{d-1}` up to a time change) to hit the origin. Hence
//! `Var(int_0^t sum_{x_1=0} eta_s(x) H(x/N) ds) <= t^2 c sum_{x,y} |H(x)| |H(y)| Gamma((x - y)^perp)`
//! with `c = rho (1 - rho)` for a constant profile and `c = 1` otherwise.
//! The double sum is estimated by sampling pairs uniformly from the plane.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{InitialProfile, MembraneRates};
use crate::rng::derive_seed;
use crate::stats::{replicate, Estimate};
use crate::testfn::TestFunction;
use crate::walks::{hit_origin, tail_bound, HitOutcome, Roulette};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: u64,
    pub plane_sites: u64,
    /// Monte Carlo value of the covariance bound.
    pub bound: Estimate,
    /// Contribution that censoring at the horizon may have removed.
    pub censoring_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `log bound` against `log N`; `None` if fewer
    /// than two points are positive.
    pub exponent: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingOptions {
    pub d: usize,
    /// Macroscopic half-width of the plane window.
    pub half_width: u64,
    pub t: f64,
    pub horizon: u64,
}

/// Upper-bound estimates of the boundary variance for each `N` in `n_list`
/// and the fitted growth exponent.
pub fn boundary_variance_scaling<H: TestFunction + ?Sized>(
    rates: &MembraneRates,
    profile: &InitialProfile,
    h: &H,
    n_list: &[u64],
    opts: &ScalingOptions,
    replicas: u64,
    seed: u64,
) -> Result<ScalingReport> {
    profile.validate()?;
    if opts.d < 2 {
        return Err(Error::domain("the boundary plane needs d >= 2"));
    }
    if !(opts.t.is_finite() && opts.t >= 0.0) {
        return Err(Error::domain("time must be finite and nonnegative"));
    }
    let m = opts.d - 1;
    let c = match profile.constant_value() {
        Some(r) => r * (1.0 - r),
        None => 1.0,
    };
    let mut points = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        MembraneRates { n, ..*rates }.validate()?;
        let half = (opts.half_width * n) as i64;
        let side = (2 * half + 1) as u64;
        let sites = side.pow(m as u32);
        let nf = n as f64;
        let habs = |perp: &[i64], x: &mut Vec<i64>, buf: &mut Vec<f64>| {
            x.clear();
            x.push(0);
            x.extend_from_slice(perp);
            h.at_site(x, nf, buf).abs()
        };
        let mut x = Vec::new();
        let mut buf = Vec::new();
        let mut perp = vec![0i64; m];
        let mut h_sum = 0.0;
        for idx in 0..sites {
            let mut r = idx;
            for p in perp.iter_mut() {
                *p = (r % side) as i64 - half;
                r /= side;
            }
            h_sum += habs(&perp, &mut x, &mut buf);
        }
        let scale = opts.t * opts.t * c * (sites as f64).powi(2);
        let acc = if scale == 0.0 || h_sum == 0.0 {
            None
        } else {
            Some(replicate(replicas, derive_seed(seed, k as u64), |rng, _| {
                let mut x = Vec::with_capacity(opts.d);
                let mut buf = Vec::new();
                let a: Vec<i64> = (0..m).map(|_| rng.random_range(-half..=half)).collect();
                let b: Vec<i64> = (0..m).map(|_| rng.random_range(-half..=half)).collect();
                let w = habs(&a, &mut x, &mut buf) * habs(&b, &mut x, &mut buf);
                if w == 0.0 {
                    return 0.0;
                }
                let z: Vec<i64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
                let l1: i64 = z.iter().map(|v| v.abs()).sum();
                if l1 == 0 {
                    return w;
                }
                let roulette = Roulette::for_dim(m, (4 * l1).max(16));
                match hit_origin(&z, opts.horizon, roulette, rng) {
                    HitOutcome::Hit { weight, .. } => w * weight,
                    _ => 0.0,
                }
            }))
        };
        let bound = acc.map_or(Estimate::exact(0.0), |a| a.estimate().scaled(scale));
        let slack = opts.t * opts.t * c * h_sum * h_sum * tail_bound(m, opts.horizon);
        points.push(ScalingPoint { n, plane_sites: sites, bound, censoring_slack: slack });
    }
    let exponent = fit_exponent(&points);
    Ok(ScalingReport { points, exponent })
}

fn fit_exponent(points: &[ScalingPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> =
        points.iter().filter(|p| p.bound.mean > 0.0).map(|p| ((p.n as f64).ln(), p.bound.mean.ln())).collect();
    if xy.len() < 2 {
        return None;
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ScalingOptions {
        ScalingOptions { d: 3, half_width: 1, t: 1.0, horizon: 10_000 }
    }

    #[test]
    fn degenerate_inputs_give_zero() {
        let rates = MembraneRates::new(1.0, 1.0, 4).unwrap();
        let one = |_: &[f64]| 1.0;
        let zero = |_: &[f64]| 0.0;
        let r = boundary_variance_scaling(&rates, &InitialProfile::Constant { value: 0.0 }, &one, &[4, 8], &opts(), 100, 1).unwrap();
        assert!(r.points.iter().all(|p| p.bound.mean == 0.0));
        assert_eq!(r.exponent, None);
        let r = boundary_variance_scaling(&rates, &InitialProfile::Constant { value: 0.5 }, &zero, &[4], &opts(), 100, 1).unwrap();
        assert_eq!(r.points[0].bound.mean, 0.0);
    }

    #[test]
    fn exponent_of_exact_power_law() {
        let pts: Vec<ScalingPoint> = [2u64, 4, 8]
            .iter()
            .map(|&n| ScalingPoint {
                n,
                plane_sites: 0,
                bound: Estimate::exact(3.0 * (n as f64).powi(5)),
                censoring_slack: 0.0,
            })
            .collect();
        assert!((fit_exponent(&pts).unwrap() - 5.0).abs() < 1e-12);
    }
}
