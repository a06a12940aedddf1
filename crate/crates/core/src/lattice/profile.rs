use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the membrane a coordinate-1 value at 0 belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

/// Initial density `rho_0`, a function of the first coordinate only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant { value: f64 },
    /// `plus` on `u_1 > 0`, `minus` on `u_1 <= 0`. Discontinuous, so it is
    /// flagged as outside the Lipschitz assumption.
    Step { plus: f64, minus: f64 },
    /// `clamp(intercept + slope * u_1, 0, 1)`.
    Ramp { intercept: f64, slope: f64 },
    /// Piecewise-linear interpolation, constant beyond the end nodes.
    Tabulated { u: Vec<f64>, rho: Vec<f64> },
}

impl InitialProfile {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        match self {
            InitialProfile::Constant { value } if !unit(*value) => {
                Err(Error::domain(format!("constant profile {value} outside [0,1]")))
            }
            InitialProfile::Step { plus, minus } if !unit(*plus) || !unit(*minus) => {
                Err(Error::domain("step levels must lie in [0,1]"))
            }
            InitialProfile::Ramp { intercept, slope } if !intercept.is_finite() || !slope.is_finite() => {
                Err(Error::domain("ramp parameters must be finite"))
            }
            InitialProfile::Tabulated { u, rho } => {
                if u.is_empty() || u.len() != rho.len() {
                    return Err(Error::domain("tabulated profile needs matching nonempty u/rho"));
                }
                if u.windows(2).any(|w| !(w[0] < w[1])) || u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("tabulated nodes must be finite and strictly increasing"));
                }
                if rho.iter().any(|&r| !unit(r)) {
                    return Err(Error::domain("tabulated values must lie in [0,1]"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether the profile is Lipschitz (everything except a genuine step).
    pub fn within_lipschitz_assumption(&self) -> bool {
        match self {
            InitialProfile::Step { plus, minus } => plus == minus,
            _ => true,
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            InitialProfile::Constant { value } => Some(*value),
            InitialProfile::Step { plus, minus } if plus == minus => Some(*plus),
            InitialProfile::Ramp { intercept, slope } if *slope == 0.0 => Some(intercept.clamp(0.0, 1.0)),
            InitialProfile::Tabulated { rho, .. } if rho.windows(2).all(|w| w[0] == w[1]) => Some(rho[0]),
            _ => None,
        }
    }

    /// `rho_0(u_1)`; the value at 0 is the minus-side value.
    pub fn value(&self, u1: f64) -> f64 {
        self.value_signed(u1, Side::Minus)
    }

    /// Value with an explicit side at `u_1 = 0`.
    pub fn value_signed(&self, u1: f64, side: Side) -> f64 {
        match self {
            InitialProfile::Constant { value } => *value,
            InitialProfile::Step { plus, minus } => {
                if u1 > 0.0 || (u1 == 0.0 && side == Side::Plus) {
                    *plus
                } else {
                    *minus
                }
            }
            InitialProfile::Ramp { intercept, slope } => (intercept + slope * u1).clamp(0.0, 1.0),
            InitialProfile::Tabulated { u, rho } => interpolate(u, rho, u1),
        }
    }

    /// Value at lattice site with coordinate-1 value `x1` at scale `n`.
    pub fn at_site(&self, x1: i64, n: f64) -> f64 {
        self.value(x1 as f64 / n)
    }
}

fn interpolate(u: &[f64], rho: &[f64], x: f64) -> f64 {
    if x <= u[0] {
        return rho[0];
    }
    let last = u.len() - 1;
    if x >= u[last] {
        return rho[last];
    }
    let k = u.partition_point(|&v| v <= x) - 1;
    let w = (x - u[k]) / (u[k + 1] - u[k]);
    rho[k] + w * (rho[k + 1] - rho[k])
}
