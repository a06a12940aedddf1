//! Dual random walks: slow-bond walks, frozen and coalescing pairs,
//! duality estimators and hitting probabilities.

mod duality;
mod fast1d;
mod hitting;
mod walk;

pub use duality::{
    coalescence_probability, meeting_time_sample, one_point_function, pair_correlation_qv, two_point_function,
    MeetingTime, PairCorrelation,
};
pub use fast1d::{sample_slow_walk, SlowWalk1D};
pub use hitting::{gamma_d, hit_origin, hitting_prob_gamma, tail_bound, HitOutcome, HittingEstimate, Roulette};
pub use walk::{step_walk, CoalescingPair, FrozenWalk, Space, WalkD};
