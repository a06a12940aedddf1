use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Side;
use crate::scalar::Scalar;

/// Coupling of the two half-lines at `u_1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterfaceCondition {
    /// No interface: the ordinary heat equation through 0.
    None,
    /// `d+ rho = d- rho = alpha (rho(0+) - rho(0-))`.
    Robin { alpha: f64 },
    /// `d+ rho = d- rho = 0`.
    Neumann,
}

impl InterfaceCondition {
    pub fn validate(&self) -> Result<()> {
        match self {
            InterfaceCondition::Robin { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                Err(Error::domain(format!("Robin coefficient must be positive, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// Coefficient of the jump in the interface flux (0 for Neumann).
    pub fn coupling(&self) -> f64 {
        match self {
            InterfaceCondition::Robin { alpha } => *alpha,
            _ => 0.0,
        }
    }
}

/// Nodal values on `[-m dx, 0^-] U [0^+, m dx]`; the interface node is
/// stored once per side.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D<T> {
    pub dx: T,
    /// `minus[i]` sits at `u = -(m - i) dx`; the last entry is `0^-`.
    pub minus: Vec<T>,
    /// `plus[j]` sits at `u = j dx`; the first entry is `0^+`.
    pub plus: Vec<T>,
    pub time: T,
}

impl<T: Scalar> Grid1D<T> {
    /// Grid with `m` intervals per side sampled from `f`.
    pub fn from_fn(dx: T, m: usize, f: impl Fn(T, Side) -> T) -> Self {
        let minus = (0..=m).map(|i| f(-T::from_usize_lossy(m - i) * dx, Side::Minus)).collect();
        let plus = (0..=m).map(|j| f(T::from_usize_lossy(j) * dx, Side::Plus)).collect();
        Self { dx, minus, plus, time: T::zero() }
    }

    /// Intervals per side.
    pub fn half_nodes(&self) -> usize {
        self.plus.len() - 1
    }

    pub fn window(&self) -> T {
        self.dx * T::from_usize_lossy(self.half_nodes())
    }

    /// One-sided value at the interface.
    pub fn trace(&self, side: Side) -> T {
        match side {
            Side::Plus => self.plus[0],
            Side::Minus => *self.minus.last().expect("nonempty grid"),
        }
    }

    /// One-sided difference quotients `(rho_1 - rho_0+)/dx` and
    /// `(rho_0- - rho_-1)/dx`.
    pub fn one_sided_fluxes(&self) -> (T, T) {
        let m = self.half_nodes();
        ((self.plus[1] - self.plus[0]) / self.dx, (self.minus[m] - self.minus[m - 1]) / self.dx)
    }

    /// Piecewise-linear interpolation on the half-line of `side` (`u` is
    /// clamped to the window).
    pub fn value_at(&self, u: T, side: Side) -> T {
        let m = self.half_nodes();
        let use_plus = u > T::zero() || (u == T::zero() && side == Side::Plus);
        let (vals, pos) = if use_plus { (&self.plus, u / self.dx) } else { (&self.minus, (u / self.dx) + T::from_usize_lossy(m)) };
        let pos = pos.max(T::zero()).min(T::from_usize_lossy(m));
        let k = pos.floor().to_usize().unwrap_or(0).min(m.saturating_sub(1));
        let w = pos - T::from_usize_lossy(k);
        vals[k] + w * (vals[k + 1] - vals[k])
    }

    /// Nodes as `(u, side, value)`; side is `None` away from the interface.
    pub fn nodes(&self) -> impl Iterator<Item = (T, Option<Side>, T)> + '_ {
        let m = self.half_nodes();
        let minus = self.minus.iter().enumerate().map(move |(i, &v)| {
            let u = -T::from_usize_lossy(m - i) * self.dx;
            (u, (i == m).then_some(Side::Minus), v)
        });
        let plus = self.plus.iter().enumerate().map(move |(j, &v)| {
            (T::from_usize_lossy(j) * self.dx, (j == 0).then_some(Side::Plus), v)
        });
        minus.chain(plus)
    }

    /// Trapezoid integral of `g(u, side, rho(u))` over both half-lines.
    pub fn integrate(&self, g: impl Fn(T, Side, T) -> T) -> T {
        let m = self.half_nodes();
        let half = T::lit(0.5);
        let mut s = T::zero();
        for (i, &v) in self.minus.iter().enumerate() {
            let u = -T::from_usize_lossy(m - i) * self.dx;
            let w = if i == 0 || i == m { half } else { T::one() };
            s = s + w * g(u, Side::Minus, v);
        }
        for (j, &v) in self.plus.iter().enumerate() {
            let u = T::from_usize_lossy(j) * self.dx;
            let w = if j == 0 || j == m { half } else { T::one() };
            s = s + w * g(u, Side::Plus, v);
        }
        s * self.dx
    }

    pub fn mass(&self) -> T {
        self.integrate(|_, _, v| v)
    }

    /// `sup |a - b|` over the nodes of the coarser grid (spacings must be
    /// integer multiples of each other).
    pub fn sup_distance(&self, other: &Grid1D<T>) -> T {
        let (coarse, fine) = if self.dx >= other.dx { (self, other) } else { (other, self) };
        coarse
            .nodes()
            .map(|(u, side, v)| (v - fine.value_at(u, side.unwrap_or(Side::Plus))).abs())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// CSV rows `(t, u1, side, rho)` with side `-`, `+` or `bulk`.
pub fn write_profile<W: std::io::Write, T: Scalar>(w: &mut csv::Writer<W>, grid: &Grid1D<T>) -> Result<()> {
    for (u, side, v) in grid.nodes() {
        let s = side.map_or("bulk", |s| s.symbol());
        w.write_record([grid.time.to_string(), u.to_string(), s.to_string(), v.to_string()])?;
    }
    Ok(())
}
