//! Density fluctuation field: Dynkin decomposition, martingale checks,
//! test-function spaces and reference quantities of the Gaussian limit.

mod field;
mod limits;
mod martingale;
mod sbeta;
mod scaling;

pub use field::{dynkin_terms, field_eval, mean_field_from_grid, qv_integrand, DynkinTerms};
pub use limits::{limit_variance, ou_covariance, qv_limit_integrated, qv_limit_reference, Quadrature, RhoPath};
pub use martingale::{ledger_from_trajectories, martingale_check, MartingaleLedger, MartingaleReport};
pub use sbeta::{validate_sbeta, OrderCheck, SBetaFunction, SBetaRegime, SBetaReport, SBETA_TOLERANCE};
pub use scaling::{boundary_variance_scaling, ScalingOptions, ScalingPoint, ScalingReport};
