//! Replica statistics: running moments, deterministic parallel reduction,
//! and the handful of goodness-of-fit tests the validators need.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::rng::{replica_rng, StreamRng};

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    /// A value known without sampling error.
    pub fn exact(mean: f64) -> Self {
        Self { mean, stderr: 0.0, samples: 0 }
    }

    /// `|self - other| <= k * sqrt(se_1^2 + se_2^2)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        let se = self.stderr.hypot(other.stderr);
        (self.mean - other.mean).abs() <= k * se
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { mean: self.mean * c, stderr: self.stderr * c.abs(), samples: self.samples }
    }
}

/// Welford accumulator; `merge` is Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.n as f64 / nf;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / nf;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 with fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> Estimate {
        let stderr = if self.n < 2 { 0.0 } else { (self.variance() / self.n as f64).sqrt() };
        Estimate { mean: self.mean, stderr, samples: self.n }
    }
}

const CHUNK: u64 = 512;

/// Runs `f` once per replica (each on its own stream) and reduces the
/// `width` returned values into one accumulator per slot.
///
/// Chunks are merged in index order, so the result is bit-identical for any
/// thread count.
pub fn replicate_vec<F>(replicas: u64, seed: u64, width: usize, f: F) -> Vec<Accumulator>
where
    F: Fn(&mut StreamRng, u64, &mut [f64]) + Sync,
{
    let chunks = replicas.div_ceil(CHUNK);
    let partial: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accumulator::new(); width];
            let mut buf = vec![0.0; width];
            for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                let mut rng = replica_rng(seed, r);
                f(&mut rng, r, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Accumulator::new(); width];
    for p in &partial {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    total
}

/// Single-valued form of [`replicate_vec`].
pub fn replicate<F>(replicas: u64, seed: u64, f: F) -> Accumulator
where
    F: Fn(&mut StreamRng, u64) -> f64 + Sync,
{
    replicate_vec(replicas, seed, 1, |rng, r, out| out[0] = f(rng, r))[0]
}

/// Draws one sample per replica, in replica order.
pub fn collect_samples<T, F>(replicas: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            f(&mut rng, r)
        })
        .collect()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson chi-square p-value. Bins with expected count below 5 are pooled
/// into their neighbor before testing.
pub fn chi_square_p_value(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o_acc;
            *le += e_acc;
        } else {
            obs.push(o_acc);
            exp.push(e_acc);
        }
    }
    if obs.len() < 2 {
        return 1.0;
    }
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dist = ChiSquared::new((obs.len() - 1) as f64).expect("positive dof");
    1.0 - dist.cdf(stat)
}

/// Two-sample chi-square homogeneity p-value for histograms `a` and `b` over
/// the same bins. Sparse bins are pooled until the combined count is 10.
pub fn chi_square_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (na, nb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        cur.0 += x;
        cur.1 += y;
        if cur.0 + cur.1 >= 10.0 {
            bins.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if cur.0 + cur.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let stat: f64 = bins.iter().map(|&(x, y)| (ka * x - kb * y).powi(2) / (x + y)).sum();
    let dist = ChiSquared::new((bins.len() - 1) as f64).expect("positive dof");
    1.0 - dist.cdf(stat)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}
