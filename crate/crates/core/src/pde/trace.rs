//! One-sided averages near the interface.

use crate::error::{Error, Result};
use crate::lattice::Side;
use crate::scalar::Scalar;

use super::grid::Grid1D;

/// Mean of the piecewise-linear profile over `(0, eps)` (plus) or
/// `(-eps, 0)` (minus).
pub fn trace_average<T: Scalar>(grid: &Grid1D<T>, eps: T, side: Side) -> Result<T> {
    if eps < grid.dx || eps > grid.window() {
        return Err(Error::domain("averaging width must lie between the grid spacing and the window"));
    }
    let vals: Vec<T> = match side {
        Side::Plus => grid.plus.clone(),
        Side::Minus => grid.minus.iter().rev().cloned().collect(),
    };
    let cells = eps / grid.dx;
    let full = cells.floor().to_usize().unwrap_or(0);
    let half = T::lit(0.5);
    let mut s = T::zero();
    for k in 0..full {
        s = s + half * (vals[k] + vals[k + 1]) * grid.dx;
    }
    let frac = cells - T::from_usize_lossy(full);
    if frac > T::zero() && full < vals.len() - 1 {
        let a = vals[full];
        let b = a + frac * (vals[full + 1] - a);
        s = s + half * (a + b) * frac * grid.dx;
    }
    Ok(s / eps)
}

/// Average of `f` over the box `u + (0, eps) x (-eps, eps)^{d-1}` (plus) or
/// its mirror image (minus), by the tensor midpoint rule with cells of size
/// at most `h`. `u` is a point of the interface (`u_1` is ignored).
pub fn trace_average_fn<T: Scalar>(f: impl Fn(&[T]) -> T, u: &[T], eps: T, side: Side, h: T) -> Result<T> {
    if !(eps >= h && h > T::zero()) {
        return Err(Error::domain("need eps >= h > 0"));
    }
    let d = u.len();
    let n = (eps / h).ceil().to_usize().unwrap_or(1).max(1);
    let dv = eps / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let counts: Vec<usize> = (0..d).map(|i| if i == 0 { n } else { 2 * n }).collect();
    let mut idx = vec![0usize; d];
    let mut v = vec![T::zero(); d];
    let mut sum = T::zero();
    let mut cells = 0usize;
    'outer: loop {
        v[0] = T::lit(side.sign()) * (T::from_usize_lossy(idx[0]) + half) * dv;
        for i in 1..d {
            v[i] = u[i] - eps + (T::from_usize_lossy(idx[i]) + half) * dv;
        }
        sum = sum + f(&v);
        cells += 1;
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < counts[i] {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    Ok(sum / T::from_usize_lossy(cells))
}

/// Averaging kernel `iota^{+-}_{eps,u}(v) = 2^{1-d} eps^{-d}` on the box of
/// [`trace_average_fn`], 0 elsewhere.
pub fn iota<T: Scalar>(side: Side, eps: T, u: &[T], v: &[T]) -> T {
    let d = u.len();
    let s = T::lit(side.sign()) * (v[0] - u[0]);
    let inside = s > T::zero() && s < eps && (1..d).all(|i| (v[i] - u[i]).abs() < eps);
    if inside {
        T::lit(2f64.powi(1 - d as i32)) * eps.powi(-(d as i32))
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_signs() {
        let g = Grid1D::from_fn(0.01f64, 100, |_, s| s.sign());
        assert!((trace_average(&g, 0.05, Side::Plus).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_average(&g, 0.05, Side::Minus).unwrap() + 1.0).abs() < 1e-12);
        let sign = |v: &[f64]| v[0].signum();
        assert_eq!(trace_average_fn(sign, &[0.0, 0.3], 0.1, Side::Minus, 0.02).unwrap(), -1.0);
        assert!(trace_average(&g, 0.001, Side::Plus).is_err());
    }

    #[test]
    fn linear_average_is_half_width() {
        let g = Grid1D::from_fn(0.01f64, 100, |u, _| u.max(0.0));
        for eps in [0.01, 0.05, 0.123] {
            assert!((trace_average(&g, eps, Side::Plus).unwrap() - eps / 2.0).abs() < 1e-12);
        }
        let f = |v: &[f64]| v[0];
        assert!((trace_average_fn(f, &[0.0, 0.0, 0.0], 0.2, Side::Plus, 0.01).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn kernel_has_unit_mass() {
        // Integrate the kernel with a midpoint rule on a box containing its support.
        let (eps, n) = (0.3f64, 60);
        let h = 1.0 / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = [(i as f64 + 0.5) * h - 0.5, (j as f64 + 0.5) * h - 0.5];
                mass += iota(Side::Plus, eps, &[0.0, 0.0], &v) * h * h;
            }
        }
        assert!((mass - 1.0).abs() < 0.02);
    }
}
