//! Test functions paired with configurations and profiles.

use crate::lattice::Side;

/// A real function on the two glued half-spaces `{u_1 <= 0^-}` and
/// `{u_1 >= 0^+}`; `side` only matters on the hyperplane `u_1 = 0`.
pub trait TestFunction: Sync {
    fn eval(&self, u: &[f64], side: Side) -> f64;

    /// Value at lattice site `x` at scale `n`: sites with `x_1 >= 1` lie on
    /// the plus side.
    fn at_site(&self, x: &[i64], n: f64, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(x.iter().map(|&c| c as f64 / n));
        let side = if x[0] >= 1 { Side::Plus } else { Side::Minus };
        self.eval(buf, side)
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> TestFunction for F {
    fn eval(&self, u: &[f64], _side: Side) -> f64 {
        self(u)
    }
}

/// Side-dependent test function built from two closures.
pub struct Sided<P, M> {
    pub plus: P,
    pub minus: M,
}

impl<P, M> TestFunction for Sided<P, M>
where
    P: Fn(&[f64]) -> f64 + Sync,
    M: Fn(&[f64]) -> f64 + Sync,
{
    fn eval(&self, u: &[f64], side: Side) -> f64 {
        if u[0] > 0.0 || (u[0] == 0.0 && side == Side::Plus) {
            (self.plus)(u)
        } else {
            (self.minus)(u)
        }
    }
}
