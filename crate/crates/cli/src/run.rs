//! Preset experiments. Each produces a report and zero or more tables.

use std::collections::BTreeMap;

use membrane_voter::fluctuation::{boundary_variance_scaling, martingale_check, ScalingOptions};
use membrane_voter::pde::{condition_for, solve_1d, SolveOptions};
use membrane_voter::rng::derive_seed;
use membrane_voter::snapping::{invariance_distance, SignedHalfLinePoint, SnappingParams};
use membrane_voter::walks::{gamma_d, one_point_function, pair_correlation_qv, Space};
use membrane_voter::{BoxGeometry, MembraneRates, Side};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Preset};
use crate::table::Table;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub op: Preset,
    pub params: Value,
    pub estimates: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<(String, Table)>,
    pub summary: String,
}

struct Builder {
    estimates: BTreeMap<String, f64>,
    stderr: BTreeMap<String, f64>,
    metrics: BTreeMap<String, f64>,
}

impl Builder {
    fn new() -> Self {
        Self { estimates: BTreeMap::new(), stderr: BTreeMap::new(), metrics: BTreeMap::new() }
    }

    fn estimate(&mut self, name: &str, mean: f64, stderr: f64) {
        self.estimates.insert(name.into(), mean);
        self.stderr.insert(name.into(), stderr);
    }

    fn exact(&mut self, name: &str, v: f64) {
        self.estimates.insert(name.into(), v);
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    fn finish(self, cfg: &ExperimentConfig, pass: bool, tables: Vec<(String, Table)>, summary: String) -> Outcome {
        let mut params = serde_json::to_value(cfg).expect("config serializes");
        if let Value::Object(m) = &mut params {
            m.remove("threads");
            m.remove("output_dir");
        }
        let report = Report {
            op: cfg.preset,
            params,
            estimates: self.estimates,
            stderr: self.stderr,
            pass,
            metrics: self.metrics,
        };
        Outcome { report, tables, summary }
    }
}

pub fn execute(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    match cfg.preset {
        Preset::HydroSub | Preset::HydroRobin | Preset::HydroNeumann => hydro(cfg),
        Preset::Invariance => invariance(cfg),
        Preset::QvLimit => qv_limit(cfg),
        Preset::MartingaleExact => martingale(cfg),
        Preset::GammaEstimate => gamma(cfg),
        Preset::VarianceScaling => scaling(cfg),
    }
}

fn rates(cfg: &ExperimentConfig) -> membrane_voter::Result<MembraneRates> {
    MembraneRates::new(cfg.rates.alpha, cfg.rates.beta, cfg.n)
}

/// Dual one-point function against the interface heat equation at 21
/// points of `[-1, 1]`.
fn hydro(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let rates = rates(cfg)?;
    let cond = condition_for(&SnappingParams::from_rates(&rates));
    let pde = solve_1d::<f64>(&cfg.profile, cfg.t, &cond, 0.005, 0.0005, &SolveOptions::default())?;
    let n = cfg.n as f64;
    let mut table = Table::new(&["x", "u", "mc", "mc_stderr", "pde", "gap"]);
    let mut sup: f64 = 0.0;
    for i in -10i64..=10 {
        let x = (i as f64 * n / 10.0).round() as i64;
        let u = x as f64 / n;
        let side = if x >= 1 { Side::Plus } else { Side::Minus };
        let est = one_point_function(&[x], cfg.t, &rates, &Space::Lattice, &cfg.profile, cfg.replicas, derive_seed(cfg.seed, (i + 10) as u64))?;
        let p = pde.grid.value_at(u, side);
        let gap = (est.mean - p).abs();
        sup = sup.max(gap);
        table.push(vec![x as f64, u, est.mean, est.stderr, p, gap]);
    }
    let mut b = Builder::new();
    b.exact("sup_gap", sup);
    b.metric("pde_dx", 0.005);
    b.metric("pde_dt", 0.0005);
    let pass = sup <= cfg.tolerance;
    let summary = format!("sup |mc - pde| = {sup:.4} (tolerance {})", cfg.tolerance);
    Ok(b.finish(cfg, pass, vec![("profile".into(), table)], summary))
}

/// KS distance between the rescaled slow-bond walk and the snapping-out
/// process from four starting points.
fn invariance(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let rates = rates(cfg)?;
    let params = SnappingParams::from_rates(&rates);
    let starts = [
        (SignedHalfLinePoint::new(-1.0)?, -1.0, -1.0),
        (SignedHalfLinePoint::zero(Side::Minus), 0.0, -1.0),
        (SignedHalfLinePoint::zero(Side::Plus), 0.0, 1.0),
        (SignedHalfLinePoint::new(1.0)?, 1.0, 1.0),
    ];
    let mut table = Table::new(&["u", "side", "ks"]);
    let mut worst: f64 = 0.0;
    for (k, (u, v, side)) in starts.into_iter().enumerate() {
        let d = invariance_distance(u, cfg.t, &rates, &params, cfg.replicas, derive_seed(cfg.seed, k as u64))?;
        worst = worst.max(d);
        table.push(vec![v, side, d]);
    }
    let mut b = Builder::new();
    b.exact("max_ks", worst);
    let pass = worst <= cfg.tolerance;
    let summary = format!("max KS distance {worst:.4} (tolerance {})", cfg.tolerance);
    Ok(b.finish(cfg, pass, vec![("ks".into(), table)], summary))
}

/// Per-site quadratic-variation rate away from the membrane against
/// `4 d (1 - gamma_d) rho (1 - rho)`.
fn qv_limit(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let rates = rates(cfg)?;
    // Validation guarantees a constant profile.
    let rho = cfg.profile.constant_value().unwrap_or(0.5);
    let mut x = vec![0i64; cfg.d];
    x[0] = cfg.n as i64;
    let pc = pair_correlation_qv(&x, cfg.t, &rates, &Space::Lattice, &cfg.profile, cfg.replicas, derive_seed(cfg.seed, 1))?;
    let g = gamma_d(cfg.d, cfg.horizon.unwrap_or(1), cfg.replicas, derive_seed(cfg.seed, 2));
    let target = 4.0 * cfg.d as f64 * (1.0 - g.value()) * rho * (1.0 - rho);
    let rel = (pc.weighted.mean - target).abs() / target;
    let mut b = Builder::new();
    b.estimate("qv_rate", pc.weighted.mean, pc.weighted.stderr);
    b.estimate("gamma", g.estimate.mean, g.estimate.stderr);
    b.exact("target", target);
    b.exact("relative_gap", rel);
    b.metric("gamma_tail_bound", g.tail_bound);
    let mut table = Table::new(&["neighbor", "bond_rate", "e_sq_diff", "e_sq_diff_stderr"]);
    for (k, e) in pc.per_bond.iter().enumerate() {
        table.push(vec![k as f64, pc.bond_rates[k], e.mean, e.stderr]);
    }
    let pass = rel <= cfg.tolerance;
    let summary = format!("QV rate {:.4} vs {target:.4}, relative gap {rel:.3} (tolerance {})", pc.weighted.mean, cfg.tolerance);
    Ok(b.finish(cfg, pass, vec![("bonds".into(), table)], summary))
}

/// Exact martingale identities on a ring of `2 L N` sites.
fn martingale(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let rates = rates(cfg)?;
    let len = (2 * cfg.l * cfg.n) as usize;
    let g = BoxGeometry::ring(1 - (cfg.l * cfg.n) as i64, len)?;
    let h = |u: &[f64]| (-u[0] * u[0] / 4.0).exp() * (1.0 + 0.3 * u[0]);
    let times = [cfg.t / 5.0, cfg.t];
    let rep = martingale_check(&cfg.profile, &g, &h, &rates, &times, cfg.replicas, cfg.seed)?.report();
    let mut table = Table::new(&["t", "m", "m_stderr", "second_moment", "second_moment_stderr", "qv", "qv_stderr", "gap", "gap_stderr"]);
    let mut worst: f64 = 0.0;
    let mut b = Builder::new();
    for k in 0..rep.times.len() {
        let (m, s, q, gap) = (&rep.mean[k], &rep.second_moment[k], &rep.qv[k], &rep.gap[k]);
        let z = |e: &membrane_voter::Estimate| if e.stderr > 0.0 { e.mean.abs() / e.stderr } else if e.mean == 0.0 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z(m)).max(z(gap));
        table.push(vec![rep.times[k], m.mean, m.stderr, s.mean, s.stderr, q.mean, q.stderr, gap.mean, gap.stderr]);
        b.estimate(&format!("mean_t{k}"), m.mean, m.stderr);
        b.estimate(&format!("gap_t{k}"), gap.mean, gap.stderr);
    }
    b.exact("max_z", worst);
    let pass = worst <= cfg.tolerance;
    let summary = format!("largest |E M| or |E M^2 - E QV| is {worst:.2} stderr (tolerance {})", cfg.tolerance);
    Ok(b.finish(cfg, pass, vec![("martingale".into(), table)], summary))
}

/// Return probability of the simple walk. Passes when the statistical error
/// plus the censoring bound is within the tolerance.
fn gamma(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let horizon = cfg.horizon.unwrap_or(1);
    let g = gamma_d(cfg.d, horizon, cfg.replicas, cfg.seed);
    let err = g.estimate.stderr + g.tail_bound;
    let mut b = Builder::new();
    b.estimate("gamma", g.estimate.mean, g.estimate.stderr);
    b.exact("error_bound", err);
    b.metric("tail_bound", g.tail_bound);
    b.metric("censored_fraction", g.censored_fraction);
    b.metric("killed_fraction", g.killed_fraction);
    let pass = err <= cfg.tolerance;
    let summary = format!("gamma_{} = {:.4} +- {:.4}, tail bound {:.1e} (tolerance {})", cfg.d, g.estimate.mean, g.estimate.stderr, g.tail_bound, cfg.tolerance);
    Ok(b.finish(cfg, pass, Vec::new(), summary))
}

/// Boundary variance bound at `N/4`, `N/2` and `N`; passes when the fitted
/// exponent is at most `d + 1 + tolerance`.
fn scaling(cfg: &ExperimentConfig) -> membrane_voter::Result<Outcome> {
    let rates = rates(cfg)?;
    let opts = ScalingOptions { d: cfg.d, half_width: cfg.l, t: cfg.t, horizon: cfg.horizon.unwrap_or(1) };
    let n_list = [cfg.n / 4, cfg.n / 2, cfg.n];
    let one = |_: &[f64]| 1.0;
    let r = boundary_variance_scaling(&rates, &cfg.profile, &one, &n_list, &opts, cfg.replicas, cfg.seed)?;
    let mut table = Table::new(&["n", "plane_sites", "bound", "bound_stderr", "censoring_slack"]);
    for p in &r.points {
        table.push(vec![p.n as f64, p.plane_sites as f64, p.bound.mean, p.bound.stderr, p.censoring_slack]);
    }
    let limit = cfg.d as f64 + 1.0;
    let mut b = Builder::new();
    b.metric("reference_exponent", limit);
    let (pass, summary) = match r.exponent {
        Some(e) => {
            b.exact("exponent", e);
            (e <= limit + cfg.tolerance, format!("fitted exponent {e:.3}, allowed up to {limit} + {}", cfg.tolerance))
        }
        None => (false, "fewer than two positive points; no exponent".to_string()),
    };
    Ok(b.finish(cfg, pass, vec![("scaling".into(), table)], summary))
}
