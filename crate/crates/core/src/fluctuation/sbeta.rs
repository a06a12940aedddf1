//! Membership tests for the test-function spaces of the fluctuation field.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pde::OneSided;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SBetaRegime {
    /// Smooth across the interface.
    Sub,
    /// `d^{+,2k+1} H(0) = d^{-,2k+1} H(0) = alpha [d^{+,2k} H(0) - d^{-,2k} H(0)]`.
    Critical { alpha: f64 },
    /// Odd one-sided derivatives vanish at 0.
    Super,
}

/// Pair of one-sided rapidly decreasing functions with a regime.
#[derive(Clone, Debug)]
pub struct SBetaFunction<T> {
    pub plus: OneSided<T>,
    pub minus: OneSided<T>,
    pub regime: SBetaRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub k: usize,
    /// Largest violation among the identities tested at this order.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SBetaReport {
    pub orders: Vec<OrderCheck>,
    pub pass: bool,
}

/// Relative tolerance of the interface identities.
pub const SBETA_TOLERANCE: f64 = 1e-6;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Checks the interface identities for `k = 0..=k_max`.
pub fn validate_sbeta<T: Scalar>(h: &SBetaFunction<T>, k_max: usize) -> Result<SBetaReport> {
    let z = T::zero();
    let d = |f: &OneSided<T>, n: usize| f.derivative(n, z).map(|v| v.as_f64());
    let mut orders = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let (op, om) = (d(&h.plus, 2 * k + 1)?, d(&h.minus, 2 * k + 1)?);
        let residual = match h.regime {
            SBetaRegime::Sub => {
                let (ep, em) = (d(&h.plus, 2 * k)?, d(&h.minus, 2 * k)?);
                rel(op, om).max(rel(ep, em))
            }
            SBetaRegime::Critical { alpha } => {
                let (ep, em) = (d(&h.plus, 2 * k)?, d(&h.minus, 2 * k)?);
                let rhs = alpha * (ep - em);
                rel(op, rhs).max(rel(om, rhs))
            }
            SBetaRegime::Super => rel(op, 0.0).max(rel(om, 0.0)),
        };
        orders.push(OrderCheck { k, residual, pass: residual <= SBETA_TOLERANCE });
    }
    let pass = orders.iter().all(|o| o.pass);
    Ok(SBetaReport { orders, pass })
}
