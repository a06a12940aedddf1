//! Weak-form residuals of the interface heat equations.

use super::grid::{Grid1D, InterfaceCondition};
use super::testfn::PiecewiseTestFunction;
use crate::error::{Error, Result};
use crate::lattice::Side;
use crate::scalar::Scalar;

/// `|LHS - RHS|` of the weak formulation at time `t`:
///
/// `<rho_t, H> - <rho_0, H> - int_0^t [ <rho_s, H''> + rho_s(0+) H'(0+)
///  - rho_s(0-) H'(0-) + alpha (rho_s(0-) - rho_s(0+)) (H(0+) - H(0-)) ] ds`.
///
/// `path` holds grids at increasing times starting at 0; the time integral
/// is the trapezoid rule over the path times up to `t`.
pub fn weak_residual<T: Scalar>(
    path: &[Grid1D<T>],
    h: &PiecewiseTestFunction<T>,
    t: T,
    cond: &InterfaceCondition,
) -> Result<T> {
    cond.validate()?;
    h.require_c2()?;
    if matches!(cond, InterfaceCondition::None) {
        h.require_continuous_at_zero()?;
    }
    let first = path.first().ok_or_else(|| Error::domain("empty path"))?;
    if first.time != T::zero() {
        return Err(Error::domain("path must start at time 0"));
    }
    let used: Vec<&Grid1D<T>> = path.iter().take_while(|g| g.time <= t + T::lit(1e-12) * (T::one() + t)).collect();
    let last = used.last().expect("nonempty");
    let slack = if used.len() > 1 { (used[1].time - used[0].time) * T::lit(1e-6) } else { T::lit(1e-12) };
    if (last.time - t).abs() > slack {
        return Err(Error::domain(format!("path has no grid at t = {t}")));
    }
    if !(h.support <= first.window()) {
        return Err(Error::domain("test function support exceeds the computational window"));
    }
    // Test function data at the nodes, shared by all times.
    let mut hv = Vec::new();
    let mut h2 = Vec::new();
    for (u, side, _) in first.nodes() {
        let s = side.unwrap_or(if u > T::zero() { Side::Plus } else { Side::Minus });
        hv.push(h.value(u, s));
        h2.push(h.derivative(2, u, s)?);
    }
    let z = T::zero();
    let (hp, hm) = (h.plus.value(z), h.minus.value(z));
    let (dp, dm) = (h.plus.derivative(1, z)?, h.minus.derivative(1, z)?);
    let alpha = T::lit(cond.coupling());
    let pair = |g: &Grid1D<T>, w: &[T]| -> T {
        let m = g.half_nodes();
        let half = T::lit(0.5);
        let mut s = T::zero();
        for (k, (_, _, v)) in g.nodes().enumerate() {
            let edge = k == 0 || k == m || k == m + 1 || k == 2 * m + 1;
            s = s + if edge { half } else { T::one() } * v * w[k];
        }
        s * g.dx
    };
    let integrand = |g: &Grid1D<T>| -> T {
        let (rp, rm) = (g.trace(Side::Plus), g.trace(Side::Minus));
        pair(g, &h2) + rp * dp - rm * dm + alpha * (rm - rp) * (hp - hm)
    };
    let mut time_integral = T::zero();
    for w in used.windows(2) {
        time_integral = time_integral + (w[1].time - w[0].time) * T::lit(0.5) * (integrand(w[0]) + integrand(w[1]));
    }
    Ok((pair(last, &hv) - pair(first, &hv) - time_integral).abs())
}
