//! Event-driven simulation of the accelerated voter chain.

use rand::Rng;
use rand_distr::Exp1;

use super::{LatticeConfig, MembraneRates};
use crate::error::{Error, Result};
use crate::rng::replica_rng;

/// One copy event: `target` took the opinion of `source` at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub target: usize,
    pub source: usize,
    pub membrane: bool,
    /// Whether the copy changed the configuration.
    pub changed: bool,
}

/// Rejection-free sampler: pick the bulk or membrane class proportionally to
/// its total rate, then a uniform bond within the class.
#[derive(Clone, Debug)]
pub struct VoterEngine {
    config: LatticeConfig,
    bulk: Vec<(u32, u32)>,
    membrane: Vec<(u32, u32)>,
    bulk_total: f64,
    total: f64,
}

/// Upper limit on the expected number of events of a single run.
const MAX_EXPECTED_EVENTS: f64 = 1e13;

impl VoterEngine {
    pub fn new(config: LatticeConfig, rates: &MembraneRates) -> Result<Self> {
        rates.validate()?;
        let mut bulk = Vec::new();
        let mut membrane = Vec::new();
        for b in config.geometry().directed_bonds() {
            let pair = (b.target as u32, b.source as u32);
            if b.membrane {
                membrane.push(pair);
            } else {
                bulk.push(pair);
            }
        }
        let n2 = rates.n_f64() * rates.n_f64();
        let bulk_total = n2 * bulk.len() as f64;
        let total = bulk_total + n2 * rates.membrane_rate() * membrane.len() as f64;
        if !total.is_finite() {
            return Err(Error::config(format!("total event rate overflows for N = {}", rates.n)));
        }
        Ok(Self { config, bulk, membrane, bulk_total, total })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn into_config(self) -> LatticeConfig {
        self.config
    }

    /// Total jump rate per unit of macroscopic time.
    pub fn total_rate(&self) -> f64 {
        self.total
    }

    /// Performs the next event if it happens before `t_end`; otherwise moves
    /// the clock to `t_end` and returns `None`. Resuming later is exact by
    /// memorylessness.
    pub fn next_event<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) -> Option<Event> {
        if self.total <= 0.0 {
            self.config.time = self.config.time.max(t_end);
            return None;
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / self.total;
        let t = self.config.time + wait;
        if t > t_end {
            self.config.time = t_end;
            return None;
        }
        self.config.time = t;
        let is_bulk = rng.random::<f64>() * self.total < self.bulk_total;
        let class = if is_bulk { &self.bulk } else { &self.membrane };
        let (target, source) = class[rng.random_range(0..class.len())];
        let (target, source) = (target as usize, source as usize);
        let new = self.config.get(source);
        let changed = self.config.get(target) != new;
        if changed {
            self.config.set(target, new);
        }
        Some(Event { t, target, source, membrane: !is_bulk, changed })
    }

    /// Runs to `t_end`, calling `on_event` after every event.
    pub fn run_until<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R, mut on_event: impl FnMut(&Event)) {
        while let Some(ev) = self.next_event(t_end, rng) {
            on_event(&ev);
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    /// Macroscopic times at which to store a copy of the configuration.
    pub snapshot_times: Vec<f64>,
    pub record_events: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: LatticeConfig,
    pub snapshots: Vec<LatticeConfig>,
    pub events: Vec<Event>,
    pub last: LatticeConfig,
}

/// Exact realization of the accelerated chain on `[0, t_macro]`.
pub fn simulate(
    config: &LatticeConfig,
    rates: &MembraneRates,
    t_macro: f64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    simulate_with(config, rates, t_macro, &mut replica_rng(seed, 0), opts)
}

pub fn simulate_with<R: Rng + ?Sized>(
    config: &LatticeConfig,
    rates: &MembraneRates,
    t_macro: f64,
    rng: &mut R,
    opts: &SimOptions,
) -> Result<Trajectory> {
    if !(t_macro.is_finite() && t_macro >= 0.0) {
        return Err(Error::domain(format!("time horizon must be finite and nonnegative, got {t_macro}")));
    }
    let mut times = opts.snapshot_times.clone();
    if times.iter().any(|&s| !(0.0..=t_macro).contains(&s)) {
        return Err(Error::domain("snapshot times must lie in [0, t_macro]"));
    }
    times.sort_by(f64::total_cmp);
    let t0 = config.time;
    let mut engine = VoterEngine::new(config.clone(), rates)?;
    if engine.total_rate() * t_macro > MAX_EXPECTED_EVENTS {
        return Err(Error::config("expected number of events is out of reach; reduce N or t"));
    }
    let mut snapshots = Vec::with_capacity(times.len());
    let mut events = Vec::new();
    for &s in times.iter().chain(std::iter::once(&t_macro)) {
        engine.run_until(t0 + s, rng, |ev| {
            if opts.record_events {
                events.push(*ev);
            }
        });
        if snapshots.len() < times.len() {
            snapshots.push(engine.config().clone());
        }
    }
    Ok(Trajectory { initial: config.clone(), snapshots, events, last: engine.into_config() })
}
