//! Voter model with a slow membrane.
//!
//! Exact lattice simulation, coalescing-walk duality, snapping-out Brownian
//! motion, finite-difference interface heat equations and fluctuation-field
//! diagnostics. Deterministic numerics in [`pde`] and [`fluctuation`] are
//! generic over [`Scalar`]; the aliases below fix them to `f64`.

pub mod error;
pub mod fluctuation;
pub mod lattice;
pub mod master;
pub mod pde;
pub mod walks;
pub mod rng;
pub mod scalar;
pub mod snapping;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use lattice::{BoxGeometry, InitialProfile, LatticeConfig, MembraneRates, Regime, Side};
pub use scalar::Scalar;
pub use stats::Estimate;
pub use testfn::TestFunction;

pub type Grid1D = pde::Grid1D<f64>;
pub type OneSided = pde::OneSided<f64>;
pub type PiecewiseTestFunction = pde::PiecewiseTestFunction<f64>;
pub type Solution = pde::Solution<f64>;
pub type SBetaFunction = fluctuation::SBetaFunction<f64>;
