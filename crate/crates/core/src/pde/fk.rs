//! Stochastic representation `rho(t, u) = E rho_0(W_{t,beta}(u))` and the
//! semigroup abstraction used by the fluctuation references.

use super::grid::{Grid1D, InterfaceCondition};
use super::solve::{solve_1d_with, SolveOptions};
use super::testfn::PiecewiseTestFunction;
use crate::error::{Error, Result};
use crate::lattice::{InitialProfile, Regime, Side};
use crate::rng::derive_seed;
use crate::snapping::{sample_w, SignedHalfLinePoint, SnappingParams};
use crate::stats::{replicate, Estimate};

/// Monte Carlo value of `E rho_0(W_{t,beta}(u))`.
pub fn feynman_kac(
    u: &[f64],
    side: Option<Side>,
    t: f64,
    rho0: &InitialProfile,
    params: &SnappingParams,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    rho0.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain("time must be positive"));
    }
    if replicas == 0 {
        return Err(Error::domain("need at least one replica"));
    }
    if u.first() == Some(&0.0) && side.is_none() {
        return Err(Error::domain("the point 0 needs a side label"));
    }
    let acc = replicate(replicas, derive_seed(seed, 0x666b), |rng, _| {
        let w = sample_w(u, side, t, params, rng).expect("validated start");
        rho0.value_signed(w.coords[0], w.side)
    });
    Ok(acc.estimate())
}

/// Interface condition of the limit equation in a regime.
pub fn condition_for(params: &SnappingParams) -> InterfaceCondition {
    match params.regime {
        Regime::Sub => InterfaceCondition::None,
        Regime::Critical => InterfaceCondition::Robin { alpha: params.alpha },
        Regime::Super => InterfaceCondition::Neumann,
    }
}

/// The semigroup `T_{beta,s}` of the limit equation applied to a test
/// function, returned on a grid.
pub trait Semigroup {
    fn evolve(&self, h: &PiecewiseTestFunction<f64>, s: f64) -> Result<Grid1D<f64>>;
}

/// Semigroup realized by the finite-difference solver.
#[derive(Clone, Copy, Debug)]
pub struct PdeSemigroup {
    pub cond: InterfaceCondition,
    pub dx: f64,
    pub dt: f64,
    pub window: f64,
}

impl Semigroup for PdeSemigroup {
    fn evolve(&self, h: &PiecewiseTestFunction<f64>, s: f64) -> Result<Grid1D<f64>> {
        let opts = SolveOptions { window: self.window, clip: false, ..Default::default() };
        let mut g = solve_1d_with(|u, side| h.value(u, side), s, &self.cond, self.dx, self.dt, &opts)?.grid;
        g.time = s;
        Ok(g)
    }
}

/// Semigroup evaluated node by node as `E H(B_{2s,beta}(u))`.
#[derive(Clone, Copy, Debug)]
pub struct MonteCarloSemigroup {
    pub params: SnappingParams,
    pub dx: f64,
    pub window: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl Semigroup for MonteCarloSemigroup {
    fn evolve(&self, h: &PiecewiseTestFunction<f64>, s: f64) -> Result<Grid1D<f64>> {
        let m = (self.window / self.dx).round() as usize;
        let mut node = 0u64;
        let mut g = Grid1D::from_fn(self.dx, m, |_, _| 0.0);
        let mut eval = |u: f64, side: Side| -> f64 {
            node += 1;
            if s <= 0.0 {
                return h.value(u, side);
            }
            let start = SignedHalfLinePoint { value: u, side };
            let params = self.params;
            replicate(self.replicas, derive_seed(self.seed, node), |rng, _| {
                let w = sample_w(&[start.value], Some(start.side), s, &params, rng).expect("valid start");
                h.value(w.coords[0], w.side)
            })
            .mean()
        };
        for i in 0..=m {
            let u = -((m - i) as f64) * self.dx;
            g.minus[i] = eval(u, Side::Minus);
        }
        for j in 0..=m {
            g.plus[j] = eval(j as f64 * self.dx, Side::Plus);
        }
        g.time = s;
        Ok(g)
    }
}
