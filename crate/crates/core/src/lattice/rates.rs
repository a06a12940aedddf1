use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bond rates of the slow-membrane voter model: every nearest-neighbor bond
/// has rate 1 except the bonds between `x_1 = 0` and `x_1 = 1`, which have
/// rate `alpha * n^(-beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembraneRates {
    pub alpha: f64,
    pub beta: f64,
    pub n: u64,
}

impl MembraneRates {
    pub fn new(alpha: f64, beta: f64, n: u64) -> Result<Self> {
        let r = Self { alpha, beta, n };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive and finite, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::domain(format!("beta must be nonnegative and finite, got {}", self.beta)));
        }
        if self.n == 0 {
            return Err(Error::domain("scaling parameter N must be at least 1"));
        }
        Ok(())
    }

    /// `alpha * N^(-beta)`.
    pub fn membrane_rate(&self) -> f64 {
        self.alpha * (self.n as f64).powf(-self.beta)
    }

    pub fn n_f64(&self) -> f64 {
        self.n as f64
    }

    /// Rate of the bond between neighbors of `Z^d` (no wrapping).
    pub fn bond_rate(&self, x: &[i64], y: &[i64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::domain("sites of different dimension"));
        }
        let dist: i64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
        if dist != 1 {
            return Err(Error::domain(format!("{x:?} and {y:?} are not nearest neighbors")));
        }
        let crosses = x[0] != y[0] && x[0].min(y[0]) == 0;
        Ok(if crosses { self.membrane_rate() } else { 1.0 })
    }

    /// Regime of the continuum limit selected by `beta`.
    pub fn regime(&self) -> Regime {
        Regime::from_beta(self.beta)
    }
}

/// Which limiting interface behaviour a given `beta` produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `beta < 1`: the membrane disappears in the limit.
    Sub,
    /// `beta = 1`: Robin interface.
    Critical,
    /// `beta > 1`: Neumann interface.
    Super,
}

impl Regime {
    pub fn from_beta(beta: f64) -> Self {
        if beta < 1.0 {
            Regime::Sub
        } else if beta == 1.0 {
            Regime::Critical
        } else {
            Regime::Super
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Sub => "sub",
            Regime::Critical => "critical",
            Regime::Super => "super",
        }
    }
}
