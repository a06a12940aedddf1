//! One-sided smooth functions and test functions glued at the interface.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::Side;
use crate::scalar::Scalar;
use crate::testfn::TestFunction;

type Func<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Highest derivative order taken by finite differences on top of the
/// closed forms. One-sided stencils in double precision lose about 1e-6
/// relative accuracy beyond it.
pub const MAX_FD_ORDER: usize = 4;

/// A function on one closed half-line, smooth up to `smoothness`
/// derivatives, with optional closed-form derivatives.
#[derive(Clone)]
pub struct OneSided<T> {
    f: Func<T>,
    derivatives: Vec<Func<T>>,
    /// Declared number of continuous derivatives (`usize::MAX` for smooth).
    pub smoothness: usize,
    side: Side,
}

impl<T> std::fmt::Debug for OneSided<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneSided")
            .field("analytic_derivatives", &self.derivatives.len())
            .field("smoothness", &self.smoothness)
            .field("side", &self.side)
            .finish()
    }
}

impl<T: Scalar> OneSided<T> {
    /// A smooth function whose derivatives are taken by finite differences.
    pub fn smooth(side: Side, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), derivatives: Vec::new(), smoothness: usize::MAX, side }
    }

    /// Adds the next closed-form derivative (first call gives `f'`).
    pub fn with_derivative(mut self, d: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.derivatives.push(Arc::new(d));
        self
    }

    pub fn with_smoothness(mut self, k: usize) -> Self {
        self.smoothness = k;
        self
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn value(&self, u: T) -> T {
        (self.f)(u)
    }

    /// `k`-th one-sided derivative at `u`. Beyond the supplied closed forms
    /// it uses finite differences that only sample the function's own side.
    pub fn derivative(&self, k: usize, u: T) -> Result<T> {
        if k == 0 {
            return Ok(self.value(u));
        }
        if k > self.smoothness {
            return Err(Error::domain(format!("derivative of order {k} requested from a C^{} function", self.smoothness)));
        }
        if k <= self.derivatives.len() {
            return Ok((self.derivatives[k - 1])(u));
        }
        // Differentiate the highest closed form by finite differences.
        let base = self.derivatives.len();
        if k - base > MAX_FD_ORDER {
            return Err(Error::domain(format!(
                "derivative order {k} needs {} finite-difference orders, limit is {MAX_FD_ORDER}",
                k - base
            )));
        }
        let g = |x: T| if base == 0 { self.value(x) } else { (self.derivatives[base - 1])(x) };
        Ok(one_sided_fd(&g, k - base, u, self.side))
    }
}

/// Fornberg weights for the `k`-th derivative at 0 on nodes `xs`.
fn fornberg(k: usize, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            for m in (0..=k.min(i)).rev() {
                let prev_i = if m > 0 { c[i - 1][m - 1] } else { 0.0 };
                let prev_j = if m > 0 { c[j][m - 1] } else { 0.0 };
                if j == i - 1 {
                    c[i][m] = c1 * (m as f64 * prev_i - xs[i - 1] * c[i - 1][m]) / c2;
                }
                c[j][m] = (xs[i] * c[j][m] - m as f64 * prev_j) / c3;
            }
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// Derivative from a stencil `u, u +- h, u +- 2h, ...` on `side` only.
fn one_sided_fd<T: Scalar>(g: &impl Fn(T) -> T, k: usize, u: T, side: Side) -> T {
    let accuracy = 8;
    let points = k + accuracy;
    let eps = T::epsilon().as_f64();
    let scale = 1.0 + u.as_f64().abs();
    let h = eps.powf(1.0 / (k + accuracy) as f64) * scale * 0.5;
    let xs: Vec<f64> = (0..points).map(|j| side.sign() * j as f64).collect();
    let w = fornberg(k, &xs);
    let mut s = 0.0;
    for (j, &wj) in w.iter().enumerate() {
        s += wj * g(u + T::lit(xs[j] * h)).as_f64();
    }
    T::lit(s / h.powi(k as i32))
}

/// Test function `H = H^+` on `u_1 > 0` and `H^-` on `u_1 <= 0`, vanishing
/// for `|u_1| >= support`.
#[derive(Clone, Debug)]
pub struct PiecewiseTestFunction<T> {
    pub plus: OneSided<T>,
    pub minus: OneSided<T>,
    pub support: T,
}

impl<T: Scalar> PiecewiseTestFunction<T> {
    pub fn new(plus: OneSided<T>, minus: OneSided<T>, support: T) -> Result<Self> {
        if plus.side != Side::Plus || minus.side != Side::Minus {
            return Err(Error::domain("parts must be labeled plus and minus"));
        }
        Ok(Self { plus, minus, support })
    }

    /// The same smooth function on both sides.
    pub fn global(f: impl Fn(T) -> T + Send + Sync + Clone + 'static, support: T) -> Self {
        Self { plus: OneSided::smooth(Side::Plus, f.clone()), minus: OneSided::smooth(Side::Minus, f), support }
    }

    pub fn part(&self, side: Side) -> &OneSided<T> {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn value(&self, u: T, side: Side) -> T {
        if u > T::zero() || (u == T::zero() && side == Side::Plus) {
            self.plus.value(u)
        } else {
            self.minus.value(u)
        }
    }

    pub fn derivative(&self, k: usize, u: T, side: Side) -> Result<T> {
        if u > T::zero() || (u == T::zero() && side == Side::Plus) {
            self.plus.derivative(k, u)
        } else {
            self.minus.derivative(k, u)
        }
    }

    /// Whether both parts are `C^2`, as the weak formulations require.
    pub fn require_c2(&self) -> Result<()> {
        if self.plus.smoothness < 2 || self.minus.smoothness < 2 {
            return Err(Error::domain("test function parts must be twice continuously differentiable"));
        }
        Ok(())
    }

    /// Checks that the two parts glue to a `C^2` function at 0.
    pub fn require_continuous_at_zero(&self) -> Result<()> {
        self.require_c2()?;
        let z = T::zero();
        for k in 0..=2 {
            let (a, b) = (self.plus.derivative(k, z)?, self.minus.derivative(k, z)?);
            let tol = T::lit(1e-6) * (T::one() + a.abs().max(b.abs()));
            if (a - b).abs() > tol {
                return Err(Error::domain(format!("test function has a jump in derivative {k} at the interface")));
            }
        }
        Ok(())
    }
}

impl<T: Scalar> TestFunction for PiecewiseTestFunction<T> {
    fn eval(&self, u: &[f64], side: Side) -> f64 {
        self.value(T::lit(u[0]), side).as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fornberg(2, &[-1.0, 0.0, 1.0]);
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] + 2.0).abs() < 1e-12 && (w[2] - 1.0).abs() < 1e-12);
        let w = fornberg(1, &[0.0, 1.0, 2.0]);
        assert!((w[0] + 1.5).abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12 && (w[2] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_of_exponential() {
        let f = OneSided::smooth(Side::Plus, |x: f64| (2.0 * x).exp());
        for k in 1..=4 {
            let d = f.derivative(k, 0.0).unwrap();
            let exact = 2f64.powi(k as i32);
            assert!((d - exact).abs() < 1e-3 * exact, "order {k}: {d}");
        }
        let g = OneSided::smooth(Side::Minus, |x: f64| if x <= 0.0 { x * x } else { 100.0 });
        assert!((g.derivative(2, 0.0).unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn closed_forms_take_precedence() {
        let f = OneSided::smooth(Side::Plus, |x: f64| x.sin()).with_derivative(|x: f64| x.cos());
        assert_eq!(f.derivative(1, 0.3).unwrap(), 0.3f64.cos());
        assert!((f.derivative(2, 0.3).unwrap() + 0.3f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn smoothness_limits_orders() {
        let f = OneSided::smooth(Side::Plus, |x: f64| x.abs().powi(3)).with_smoothness(2);
        assert!(f.derivative(3, 0.0).is_err());
        assert!(OneSided::smooth(Side::Plus, |x: f64| x).derivative(MAX_FD_ORDER + 1, 0.0).is_err());
    }

    #[test]
    fn jumps_detected() {
        let h = PiecewiseTestFunction::new(
            OneSided::smooth(Side::Plus, |x: f64| (-x * x).exp()),
            OneSided::smooth(Side::Minus, |x: f64| 0.5 * (-x * x).exp()),
            5.0,
        )
        .unwrap();
        assert!(h.require_continuous_at_zero().is_err());
        assert!(h.require_c2().is_ok());
        let g = PiecewiseTestFunction::global(|x: f64| (-x * x).exp(), 5.0);
        assert!(g.require_continuous_at_zero().is_ok());
    }
}
