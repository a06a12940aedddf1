//! Reference quantities of the Ornstein-Uhlenbeck limit.

use crate::error::{Error, Result};
use crate::lattice::Side;
use crate::pde::{Grid1D, PiecewiseTestFunction, Semigroup};
use crate::scalar::Scalar;

/// `4 d (1 - gamma_d) * transverse * int rho (1 - rho) H^2 du` at one time.
/// `transverse` is the integral of the square of the transverse factor of `H`
/// (1 for functions of `u_1` alone on a unit cross-section).
pub fn qv_limit_reference<T: Scalar>(rho: &Grid1D<T>, h: &PiecewiseTestFunction<T>, gamma_d: T, d: usize, transverse: T) -> T {
    let c = T::lit(4.0) * T::from_usize_lossy(d) * (T::one() - gamma_d) * transverse;
    c * rho.integrate(|u, side, r| {
        let hv = h.value(u, side);
        r * (T::one() - r) * hv * hv
    })
}

/// Time integral of [`qv_limit_reference`] along a recorded path
/// (trapezoid in time over the path's own times).
pub fn qv_limit_integrated<T: Scalar>(path: &[Grid1D<T>], h: &PiecewiseTestFunction<T>, gamma_d: T, d: usize, transverse: T) -> T {
    let half = T::lit(0.5);
    path.windows(2).fold(T::zero(), |acc, w| {
        let a = qv_limit_reference(&w[0], h, gamma_d, d, transverse);
        let b = qv_limit_reference(&w[1], h, gamma_d, d, transverse);
        acc + (w[1].time - w[0].time) * half * (a + b)
    })
}

/// Density `rho(tau, u)` along a time interval.
#[derive(Clone, Debug)]
pub enum RhoPath {
    Constant(f64),
    /// Profiles at increasing times; linear in time between them and held
    /// constant outside.
    Grids(Vec<Grid1D<f64>>),
}

impl RhoPath {
    pub fn validate(&self) -> Result<()> {
        match self {
            RhoPath::Constant(c) if !(0.0..=1.0).contains(c) => Err(Error::domain("density must lie in [0, 1]")),
            RhoPath::Grids(g) if g.is_empty() => Err(Error::domain("empty density path")),
            RhoPath::Grids(g) if g.windows(2).any(|w| w[0].time > w[1].time) => {
                Err(Error::domain("density path times must increase"))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, tau: f64, u: f64, side: Side) -> f64 {
        match self {
            RhoPath::Constant(c) => *c,
            RhoPath::Grids(g) => {
                let k = g.partition_point(|p| p.time <= tau);
                if k == 0 {
                    return g[0].value_at(u, side);
                }
                if k == g.len() {
                    return g[k - 1].value_at(u, side);
                }
                let (a, b) = (&g[k - 1], &g[k]);
                let w = (tau - a.time) / (b.time - a.time);
                (1.0 - w) * a.value_at(u, side) + w * b.value_at(u, side)
            }
        }
    }
}

/// Spatial quadrature used by the nested integrals: trapezoid on
/// `[-window, 0^-] U [0^+, window]` with `m` intervals per side.
fn integrate_u(window: f64, m: usize, f: impl Fn(f64, Side) -> f64) -> f64 {
    let dx = window / m as f64;
    let mut s = 0.0;
    for k in 0..=m {
        let w = if k == 0 || k == m { 0.5 } else { 1.0 };
        let u = k as f64 * dx;
        s += w * (f(u, Side::Plus) + f(-u, Side::Minus));
    }
    s * dx
}

fn trapezoid_time(t: f64, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    let nodes = nodes.max(1);
    let h = t / nodes as f64;
    (0..=nodes).map(|k| if k == 0 || k == nodes { 0.5 } else { 1.0 } * f(k as f64 * h)).sum::<f64>() * h
}

/// Quadrature resolution of [`ou_covariance`] and [`limit_variance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub window: f64,
    pub space_intervals: usize,
    pub time_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { window: 6.0, space_intervals: 1200, time_intervals: 40 }
    }
}

/// `4 d (1 - gamma_d) int_0^{t ^ s} int rho (1 - rho) H G du dtau`.
pub fn ou_covariance(
    h: &PiecewiseTestFunction<f64>,
    g: &PiecewiseTestFunction<f64>,
    t: f64,
    s: f64,
    rho: &RhoPath,
    gamma_d: f64,
    d: usize,
    q: &Quadrature,
) -> Result<f64> {
    rho.validate()?;
    let tm = t.min(s);
    if !(tm >= 0.0) {
        return Err(Error::domain("times must be nonnegative"));
    }
    let c = 4.0 * d as f64 * (1.0 - gamma_d);
    Ok(c * trapezoid_time(tm, q.time_intervals, |tau| {
        integrate_u(q.window, q.space_intervals, |u, side| {
            let r = rho.value(tau, u, side);
            r * (1.0 - r) * h.value(u, side) * g.value(u, side)
        })
    }))
}

/// `4 d (1 - gamma_d) int_0^t int rho (1 - rho) (T_{t - tau} H)^2 du dtau`,
/// with the semigroup supplied by the caller.
pub fn limit_variance<S: Semigroup + ?Sized>(
    h: &PiecewiseTestFunction<f64>,
    t: f64,
    rho: &RhoPath,
    semigroup: &S,
    gamma_d: f64,
    d: usize,
    q: &Quadrature,
) -> Result<f64> {
    rho.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain("time must be nonnegative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let nodes = q.time_intervals.max(1);
    let step = t / nodes as f64;
    let mut sum = 0.0;
    for k in 0..=nodes {
        let tau = k as f64 * step;
        let th = semigroup.evolve(h, t - tau)?;
        let inner = integrate_u(q.window, q.space_intervals, |u, side| {
            if u.abs() > th.window() + 1e-12 {
                return 0.0;
            }
            let r = rho.value(tau, u, side);
            let v = th.value_at(u, side);
            r * (1.0 - r) * v * v
        });
        sum += if k == 0 || k == nodes { 0.5 } else { 1.0 } * inner;
    }
    Ok(4.0 * d as f64 * (1.0 - gamma_d) * sum * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> PiecewiseTestFunction<f64> {
        PiecewiseTestFunction::global(|u: f64| (-u * u).exp(), 8.0)
    }

    #[test]
    fn qv_reference_at_half_density() {
        // int e^{-2u^2} du = sqrt(pi/2); normalize so int H^2 = 1.
        let k = (std::f64::consts::PI / 2.0).sqrt().sqrt();
        let h = PiecewiseTestFunction::global(move |u: f64| (-u * u).exp() / k, 8.0);
        let rho = Grid1D::from_fn(0.005, 1600, |_, _| 0.5);
        let g4 = 0.1932;
        let v = qv_limit_reference(&rho, &h, g4, 4, 1.0);
        assert!((v - 4.0 * (1.0 - g4)).abs() < 1e-9, "{v}");
        let full = Grid1D::from_fn(0.005, 1600, |_, _| 1.0);
        assert_eq!(qv_limit_reference(&full, &h, g4, 4, 1.0), 0.0);
    }

    #[test]
    fn covariance_is_symmetric_and_vanishes_at_zero() {
        let h = gauss();
        let g = PiecewiseTestFunction::global(|u: f64| (-(u - 1.0).powi(2)).exp(), 8.0);
        let q = Quadrature::default();
        let rho = RhoPath::Constant(0.3);
        let a = ou_covariance(&h, &g, 0.5, 0.7, &rho, 0.2, 4, &q).unwrap();
        let b = ou_covariance(&g, &h, 0.7, 0.5, &rho, 0.2, 4, &q).unwrap();
        assert_eq!(a, b);
        assert_eq!(ou_covariance(&h, &g, 0.0, 0.7, &rho, 0.2, 4, &q).unwrap(), 0.0);
    }

    #[test]
    fn path_interpolates_in_time() {
        let mut a = Grid1D::from_fn(0.1, 10, |_, _| 0.2);
        let mut b = Grid1D::from_fn(0.1, 10, |_, _| 0.6);
        a.time = 0.0;
        b.time = 1.0;
        let p = RhoPath::Grids(vec![a, b]);
        assert!((p.value(0.25, 0.3, Side::Plus) - 0.3).abs() < 1e-12);
        assert_eq!(p.value(2.0, 0.3, Side::Plus), 0.6);
    }
}
