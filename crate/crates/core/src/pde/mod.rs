//! Reference solutions of the interface heat equations.

mod fk;
mod grid;
mod solve;
mod testfn;
mod trace;
mod weak;

pub use fk::{condition_for, feynman_kac, MonteCarloSemigroup, PdeSemigroup, Semigroup};
pub use grid::{write_profile, Grid1D, InterfaceCondition};
pub use solve::{solve_1d, solve_1d_with, InterfaceDiagnostics, Scheme, SolveOptions, Solution};
pub use testfn::{OneSided, PiecewiseTestFunction, MAX_FD_ORDER};
pub use trace::{iota, trace_average, trace_average_fn};
pub use weak::weak_residual;
