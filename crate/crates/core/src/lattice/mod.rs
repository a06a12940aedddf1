//! The voter model with a slow membrane on a finite torus.

mod config;
mod geometry;
pub mod io;
mod profile;
mod rates;
mod sim;

pub use config::{block_average, empirical_pi, flip, sample_initial, sample_initial_with, BlockAverage, BlockSide, LatticeConfig};
pub use geometry::{BoxGeometry, DirectedBond};
pub use profile::{InitialProfile, Side};
pub use rates::{MembraneRates, Regime};
pub use sim::{simulate, simulate_with, Event, SimOptions, Trajectory, VoterEngine};
