//! Exact law of the voter chain on tiny boxes by solving the master equation.
//!
//! The forward equation `p' = p Q` is solved by uniformization, which is exact
//! up to truncation of the Poisson series.

use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, InitialProfile, LatticeConfig, MembraneRates};

/// Generator of the accelerated chain on all `2^n` configurations.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    geometry: BoxGeometry,
    sites: usize,
    /// `(target, source, rate)` for every directed bond.
    bonds: Vec<(usize, usize, f64)>,
    exit: Vec<f64>,
    max_exit: f64,
}

pub const MAX_SITES: usize = 16;

impl MasterEquation {
    pub fn new(geometry: &BoxGeometry, rates: &MembraneRates) -> Result<Self> {
        rates.validate()?;
        let sites = geometry.site_count();
        if sites > MAX_SITES {
            return Err(Error::config(format!("master equation limited to {MAX_SITES} sites, box has {sites}")));
        }
        let n2 = rates.n_f64() * rates.n_f64();
        let bonds: Vec<(usize, usize, f64)> = geometry
            .directed_bonds()
            .into_iter()
            .map(|b| (b.target, b.source, n2 * if b.membrane { rates.membrane_rate() } else { 1.0 }))
            .collect();
        let states = 1usize << sites;
        let exit: Vec<f64> = (0..states)
            .map(|s| bonds.iter().filter(|&&(x, y, _)| (s >> x & 1) != (s >> y & 1)).map(|b| b.2).sum())
            .collect();
        let max_exit = exit.iter().cloned().fold(0.0, f64::max);
        Ok(Self { geometry: geometry.clone(), sites, bonds, exit, max_exit })
    }

    pub fn states(&self) -> usize {
        1 << self.sites
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    /// Law of the product Bernoulli initial configuration.
    pub fn product_measure(&self, profile: &InitialProfile, n: u64) -> Vec<f64> {
        let rho: Vec<f64> =
            (0..self.sites).map(|i| profile.at_site(self.geometry.first_coord(i), n as f64)).collect();
        (0..self.states())
            .map(|s| rho.iter().enumerate().map(|(i, &r)| if s >> i & 1 == 1 { r } else { 1.0 - r }).product())
            .collect()
    }

    pub fn point_mass(&self, config: &LatticeConfig) -> Vec<f64> {
        let mut p = vec![0.0; self.states()];
        p[config.to_bits() as usize] = 1.0;
        p
    }

    /// One application of the uniformized transition matrix `I + Q / lambda`.
    fn step(&self, p: &[f64], lambda: f64, out: &mut [f64]) {
        for (s, o) in out.iter_mut().enumerate() {
            *o = p[s] * (1.0 - self.exit[s] / lambda);
        }
        for (s, &ps) in p.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for &(x, y, r) in &self.bonds {
                let vy = s >> y & 1;
                if (s >> x & 1) != vy {
                    let t = (s & !(1 << x)) | (vy << x);
                    out[t] += ps * r / lambda;
                }
            }
        }
    }

    /// Law at macroscopic time `t` starting from `p0`.
    pub fn evolve(&self, p0: &[f64], t: f64) -> Vec<f64> {
        assert_eq!(p0.len(), self.states());
        if t <= 0.0 || self.max_exit == 0.0 {
            return p0.to_vec();
        }
        let lambda = self.max_exit;
        // Keep each Poisson series short enough that exp(-lambda dt) is safe.
        let pieces = (lambda * t / 20.0).ceil().max(1.0) as usize;
        let dt = t / pieces as f64;
        let mut p = p0.to_vec();
        let mut v = vec![0.0; p.len()];
        let mut next = vec![0.0; p.len()];
        for _ in 0..pieces {
            let m = lambda * dt;
            let mut w = (-m).exp();
            let mut acc: Vec<f64> = p.iter().map(|x| x * w).collect();
            v.copy_from_slice(&p);
            let mut cum = w;
            let mut k = 0usize;
            while 1.0 - cum > 1e-16 && k < 10_000 {
                k += 1;
                self.step(&v, lambda, &mut next);
                std::mem::swap(&mut v, &mut next);
                w *= m / k as f64;
                cum += w;
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += w * x;
                }
            }
            p = acc;
        }
        p
    }

    pub fn expect(&self, p: &[f64], f: impl Fn(u64) -> f64) -> f64 {
        p.iter().enumerate().map(|(s, &ps)| ps * f(s as u64)).sum()
    }

    pub fn site(&self, x: &[i64]) -> Result<usize> {
        self.geometry.index(x).ok_or_else(|| Error::domain(format!("site {x:?} outside the box")))
    }

    /// `E[eta(x)]` under `p`.
    pub fn mean_occupation(&self, p: &[f64], x: &[i64]) -> Result<f64> {
        let i = self.site(x)?;
        Ok(self.expect(p, |s| (s >> i & 1) as f64))
    }

    /// `E[eta(x) eta(y)]` under `p`.
    pub fn pair_occupation(&self, p: &[f64], x: &[i64], y: &[i64]) -> Result<f64> {
        let (i, j) = (self.site(x)?, self.site(y)?);
        Ok(self.expect(p, |s| ((s >> i) & (s >> j) & 1) as f64))
    }

    /// `E[eta_t(x) eta_s(y)]` for `s <= t` from the initial law `p0`.
    pub fn two_time_occupation(&self, p0: &[f64], x: &[i64], t: f64, y: &[i64], s: f64) -> Result<f64> {
        if s > t {
            return Err(Error::domain("need s <= t"));
        }
        let (i, j) = (self.site(x)?, self.site(y)?);
        let ps = self.evolve(p0, s);
        let restricted: Vec<f64> =
            ps.iter().enumerate().map(|(st, &q)| if st >> j & 1 == 1 { q } else { 0.0 }).collect();
        let pt = self.evolve(&restricted, t - s);
        Ok(self.expect(&pt, |st| (st >> i & 1) as f64))
    }

    /// Sum of the exit rates weighted by `w`: `sum_s p(s) sum_{bonds} rate * g(s, bond)`.
    pub fn bond_functional(&self, p: &[f64], g: impl Fn(u64, usize, usize) -> f64) -> f64 {
        p.iter()
            .enumerate()
            .map(|(s, &ps)| {
                if ps == 0.0 {
                    return 0.0;
                }
                ps * self.bonds.iter().map(|&(x, y, r)| r * g(s as u64, x, y)).sum::<f64>()
            })
            .sum()
    }

    /// Applies the generator to an observable: `(Q f)(s)`.
    pub fn generator_apply(&self, state: u64, f: impl Fn(u64) -> f64) -> f64 {
        let s = state as usize;
        let base = f(state);
        self.bonds
            .iter()
            .filter(|&&(x, y, _)| (s >> x & 1) != (s >> y & 1))
            .map(|&(x, y, r)| {
                let t = (s & !(1 << x)) | ((s >> y & 1) << x);
                r * (f(t as u64) - base)
            })
            .sum()
    }

    /// `int_0^t E[g(eta_s)] ds` by composite Simpson on `intervals` pieces.
    pub fn time_integral(&self, p0: &[f64], t: f64, intervals: usize, g: impl Fn(u64) -> f64) -> f64 {
        let m = intervals.max(1) * 2;
        let h = t / m as f64;
        let mut p = p0.to_vec();
        let mut sum = 0.0;
        for k in 0..=m {
            if k > 0 {
                p = self.evolve(&p, h);
            }
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.expect(&p, &g);
        }
        sum * h / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring6() -> BoxGeometry {
        BoxGeometry::ring(-2, 6).unwrap()
    }

    #[test]
    fn probability_is_conserved() {
        let me = MasterEquation::new(&ring6(), &MembraneRates::new(1.0, 1.0, 2).unwrap()).unwrap();
        let p0 = me.product_measure(&InitialProfile::Ramp { intercept: 0.5, slope: 0.2 }, 2);
        let p = me.evolve(&p0, 3.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= -1e-15));
    }

    #[test]
    fn two_site_ring_matches_closed_form() {
        // Sites 0 and 1 with a direct membrane bond (rate r) and a wrap bond
        // (rate 1). From (1,0): P(still discordant at t) = exp(-2(1+r)t).
        let g = BoxGeometry::ring(0, 2).unwrap();
        let rates = MembraneRates::new(0.5, 0.0, 1).unwrap();
        let me = MasterEquation::new(&g, &rates).unwrap();
        let p = me.evolve(&me.point_mass(&LatticeConfig::from_bits(g, 0b01)), 0.3);
        let discordant = p[0b01] + p[0b10];
        assert!((discordant - (-2.0 * 1.5 * 0.3f64).exp()).abs() < 1e-12);
        // Each site is equally likely to be copied: mean stays 1/2.
        assert!((me.mean_occupation(&p, &[0]).unwrap() + me.mean_occupation(&p, &[1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_has_semigroup_property() {
        let me = MasterEquation::new(&ring6(), &MembraneRates::new(1.0, 0.0, 1).unwrap()).unwrap();
        let p0 = me.point_mass(&LatticeConfig::from_bits(ring6(), 0b001101));
        let a = me.evolve(&me.evolve(&p0, 0.4), 0.7);
        let b = me.evolve(&p0, 1.1);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_box_rejected() {
        let g = BoxGeometry::ring(0, 17).unwrap();
        assert!(MasterEquation::new(&g, &MembraneRates::new(1.0, 0.0, 1).unwrap()).is_err());
    }
}
