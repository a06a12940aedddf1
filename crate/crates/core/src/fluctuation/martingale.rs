//! Dynkin martingale of the field along exact trajectories.
//!
//! With `Y_t = N^{-(1+d/2)} sum_x (eta_t(x) - m_t(x)) H(x/N)` the mean-field
//! part cancels between `Y_t - Y_0` and `int d_s Y_s ds`, so
//! `M_t = N^{d/2 - 1} (pi_t(H) - pi_0(H) - int_0^t N^2 L_N pi_s(H) ds)`.
//! Both the integral and the quadratic variation are piecewise constant
//! between events and are integrated exactly.

use serde::{Deserialize, Serialize};

use super::field::SiteTables;
use crate::error::{Error, Result};
use crate::lattice::{sample_initial_with, BoxGeometry, Event, InitialProfile, LatticeConfig, MembraneRates, Trajectory, VoterEngine};
use crate::rng::derive_seed;
use crate::stats::{collect_samples, Accumulator, Estimate};
use crate::testfn::TestFunction;

const RESYNC_EVERY: u32 = 4096;

/// Running values of `pi`, of the drift and of the quadratic-variation rate.
struct Tracker<'a> {
    tables: &'a SiteTables,
    config: LatticeConfig,
    pi: f64,
    drift: f64,
    qv: f64,
    t: f64,
    pi0: f64,
    drift_int: f64,
    qv_int: f64,
    changes: u32,
}

impl<'a> Tracker<'a> {
    fn new(tables: &'a SiteTables, config: LatticeConfig) -> Self {
        let mut pi = 0.0;
        let mut drift = 0.0;
        for idx in config.iter_ones() {
            pi += tables.h[idx];
            drift += tables.generator_coef(idx);
        }
        let qv = tables.qv_sum(&config);
        let t = config.time;
        Self { tables, config, pi, drift, qv, t, pi0: pi, drift_int: 0.0, qv_int: 0.0, changes: 0 }
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.t;
        self.drift_int += dt * self.drift;
        // Incremental updates can leave rounding residue where the true rate is 0.
        self.qv_int += dt * self.qv.max(0.0);
        self.t = t;
    }

    fn apply(&mut self, ev: &Event) {
        self.advance(ev.t);
        if !ev.changed {
            return;
        }
        let x = ev.target;
        self.qv -= self.tables.local_qv(&self.config, x);
        let now = !self.config.get(x);
        self.config.set(x, now);
        self.qv += self.tables.local_qv(&self.config, x);
        self.changes += 1;
        if self.changes % RESYNC_EVERY == 0 {
            self.qv = self.tables.qv_sum(&self.config);
        }
        let s = if now { 1.0 } else { -1.0 };
        self.pi += s * self.tables.h[x];
        self.drift += s * self.tables.generator_coef(x);
    }

    /// `(M_t, int_0^t QV ds)` at the current clock.
    fn observe(&self) -> (f64, f64) {
        let (n, d) = (self.tables.n, self.tables.dim);
        let pi_scale = n.powi(-d);
        let drift_scale = n.powi(2 - d);
        let bracket = pi_scale * (self.pi - self.pi0) - drift_scale * self.drift_int;
        (n.powf(d as f64 / 2.0 - 1.0) * bracket, pi_scale * self.qv_int)
    }
}

/// Per-replica values of `M_t` and of `int_0^t QV ds` on a grid of times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MartingaleLedger {
    pub times: Vec<f64>,
    /// `m[k][r]`: replica `r` at `times[k]`.
    pub m: Vec<Vec<f64>>,
    pub qv: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub times: Vec<f64>,
    pub mean: Vec<Estimate>,
    pub second_moment: Vec<Estimate>,
    pub qv: Vec<Estimate>,
    /// `E[M_t^2 - int_0^t QV ds]`, which vanishes for the true martingale.
    pub gap: Vec<Estimate>,
}

impl MartingaleLedger {
    fn empty(times: &[f64]) -> Self {
        Self { times: times.to_vec(), m: vec![Vec::new(); times.len()], qv: vec![Vec::new(); times.len()] }
    }

    fn push(&mut self, row: &[(f64, f64)]) {
        for (k, &(m, q)) in row.iter().enumerate() {
            self.m[k].push(m);
            self.qv[k].push(q);
        }
    }

    pub fn replicas(&self) -> usize {
        self.m.first().map_or(0, Vec::len)
    }

    /// Appends the replicas of `other`, which must use the same times.
    pub fn merge(&mut self, other: &MartingaleLedger) -> Result<()> {
        if self.times != other.times {
            return Err(Error::domain("ledgers use different observation times"));
        }
        for k in 0..self.times.len() {
            self.m[k].extend_from_slice(&other.m[k]);
            self.qv[k].extend_from_slice(&other.qv[k]);
        }
        Ok(())
    }

    pub fn report(&self) -> MartingaleReport {
        let est = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Estimate> {
            (0..self.times.len())
                .map(|k| {
                    let mut a = Accumulator::new();
                    (0..self.m[k].len()).for_each(|r| a.push(f(k, r)));
                    a.estimate()
                })
                .collect()
        };
        MartingaleReport {
            times: self.times.clone(),
            mean: est(&|k, r| self.m[k][r]),
            second_moment: est(&|k, r| self.m[k][r] * self.m[k][r]),
            qv: est(&|k, r| self.qv[k][r]),
            gap: est(&|k, r| self.m[k][r] * self.m[k][r] - self.qv[k][r]),
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("observation times must be finite, nonnegative and sorted"));
    }
    Ok(())
}

/// Runs `replicas` exact trajectories from product initial laws and records
/// the martingale at `times` (relative to time 0).
pub fn martingale_check<H: TestFunction + ?Sized>(
    profile: &InitialProfile,
    geometry: &BoxGeometry,
    h: &H,
    rates: &MembraneRates,
    times: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<MartingaleLedger> {
    check_times(times)?;
    profile.validate()?;
    let tables = SiteTables::new(geometry, h, rates)?;
    let probe = VoterEngine::new(LatticeConfig::filled(geometry.clone(), false), rates)?;
    if probe.total_rate() * times[times.len() - 1] * replicas as f64 > 1e13 {
        return Err(Error::config("expected number of events is out of reach"));
    }
    let rows = collect_samples(replicas, derive_seed(seed, 0x6d61), |rng, _| {
        let init = sample_initial_with(profile, geometry, rates.n, rng).expect("validated profile");
        let mut engine = VoterEngine::new(init.clone(), rates).expect("validated rates");
        let mut tr = Tracker::new(&tables, init);
        times
            .iter()
            .map(|&t| {
                engine.run_until(t, rng, |ev| tr.apply(ev));
                tr.advance(t);
                tr.observe()
            })
            .collect::<Vec<_>>()
    });
    let mut ledger = MartingaleLedger::empty(times);
    rows.iter().for_each(|r| ledger.push(r));
    Ok(ledger)
}

/// Builds the ledger from recorded trajectories; each must carry its event
/// log and extend past the last observation time.
pub fn ledger_from_trajectories<H: TestFunction + ?Sized>(
    trajectories: &[Trajectory],
    h: &H,
    rates: &MembraneRates,
    times: &[f64],
) -> Result<MartingaleLedger> {
    check_times(times)?;
    let mut ledger = MartingaleLedger::empty(times);
    let mut tables: Option<(BoxGeometry, SiteTables)> = None;
    for traj in trajectories {
        let g = traj.initial.geometry();
        if tables.as_ref().is_none_or(|(tg, _)| tg != g) {
            tables = Some((g.clone(), SiteTables::new(g, h, rates)?));
        }
        let t0 = traj.initial.time;
        if traj.last.time < t0 + times[times.len() - 1] {
            return Err(Error::domain("trajectory ends before the last observation time"));
        }
        let mut tr = Tracker::new(&tables.as_ref().expect("set above").1, traj.initial.clone());
        let mut events = traj.events.iter().peekable();
        let row: Vec<(f64, f64)> = times
            .iter()
            .map(|&t| {
                while let Some(ev) = events.next_if(|ev| ev.t <= t0 + t) {
                    tr.apply(ev);
                }
                tr.advance(t0 + t);
                tr.observe()
            })
            .collect();
        ledger.push(&row);
    }
    Ok(ledger)
}
