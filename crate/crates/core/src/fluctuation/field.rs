//! The fluctuation field and the exact decomposition of its drift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, LatticeConfig, MembraneRates, Side};
use crate::pde::Grid1D;
use crate::testfn::TestFunction;

/// `N^{-(1 + d/2)} sum_x (eta(x) - m(x)) H(x/N)`.
///
/// `mean` holds `m(x)` by site index; it may be `None` only at empty sites
/// where `H` vanishes.
pub fn field_eval<H: TestFunction + ?Sized>(config: &LatticeConfig, mean: &[Option<f64>], h: &H, n: u64) -> Result<f64> {
    let g = config.geometry();
    if mean.len() != g.site_count() {
        return Err(Error::domain(format!("mean field has {} entries for {} sites", mean.len(), g.site_count())));
    }
    let nf = n as f64;
    let mut x = vec![0; g.dim()];
    let mut buf = Vec::with_capacity(g.dim());
    let mut sum = 0.0;
    for (idx, m) in mean.iter().enumerate() {
        g.coords_into(idx, &mut x);
        let hv = h.at_site(&x, nf, &mut buf);
        let eta = f64::from(u8::from(config.get(idx)));
        match m {
            Some(m) => sum += (eta - m) * hv,
            None if eta == 0.0 && hv == 0.0 => {}
            None => return Err(Error::domain(format!("mean field missing at site {x:?}"))),
        }
    }
    Ok(sum * nf.powf(-1.0 - g.dim() as f64 / 2.0))
}

/// Mean field read off a one-dimensional profile: `m(x) = rho(x_1/N)`,
/// missing outside the window of the grid.
pub fn mean_field_from_grid(grid: &Grid1D<f64>, geometry: &BoxGeometry, n: u64) -> Vec<Option<f64>> {
    let nf = n as f64;
    let w = grid.window();
    (0..geometry.site_count())
        .map(|idx| {
            let x1 = geometry.first_coord(idx);
            let u = x1 as f64 / nf;
            let side = if x1 >= 1 { Side::Plus } else { Side::Minus };
            (u.abs() <= w + 1e-12).then(|| grid.value_at(u, side))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BondClass {
    Bulk,
    BoundaryPlus,
    BoundaryMinus,
    Membrane,
}

/// Per-site neighbor lists with the drift coefficient of each term.
#[derive(Clone, Debug)]
pub(crate) struct SiteTables {
    pub h: Vec<f64>,
    /// `(neighbor, macroscopic rate)` for every directed bond out of a site.
    pub nbrs: Vec<Vec<(usize, f64)>>,
    /// `sum_y rate (H(y) - H(x))` split by bond class.
    pub coef: Vec<[f64; 4]>,
    pub n: f64,
    pub dim: i32,
}

impl SiteTables {
    pub fn new<H: TestFunction + ?Sized>(geometry: &BoxGeometry, h: &H, rates: &MembraneRates) -> Result<Self> {
        rates.validate()?;
        let n = rates.n_f64();
        let sites = geometry.site_count();
        let mut x = vec![0; geometry.dim()];
        let mut buf = Vec::new();
        let hv: Vec<f64> = (0..sites)
            .map(|i| {
                geometry.coords_into(i, &mut x);
                h.at_site(&x, n, &mut buf)
            })
            .collect();
        let mut nbrs = vec![Vec::new(); sites];
        let mut coef = vec![[0.0; 4]; sites];
        for idx in 0..sites {
            let c1 = geometry.first_coord(idx);
            let on_membrane = geometry.crosses_membrane(c1, 1) || geometry.crosses_membrane(c1, -1);
            for axis in 0..geometry.dim() {
                for dir in [1, -1] {
                    let Some(y) = geometry.neighbor(idx, axis, dir) else { continue };
                    let class = if axis == 0 && geometry.crosses_membrane(c1, dir) {
                        BondClass::Membrane
                    } else if axis == 0 && on_membrane {
                        if c1 >= 1 {
                            BondClass::BoundaryPlus
                        } else {
                            BondClass::BoundaryMinus
                        }
                    } else {
                        BondClass::Bulk
                    };
                    let rate = if class == BondClass::Membrane { rates.membrane_rate() } else { 1.0 };
                    nbrs[idx].push((y, rate));
                    coef[idx][class as usize] += rate * (hv[y] - hv[idx]);
                }
            }
        }
        Ok(Self { h: hv, nbrs, coef, n, dim: geometry.dim() as i32 })
    }

    pub fn generator_coef(&self, idx: usize) -> f64 {
        self.coef[idx].iter().sum()
    }

    /// `sum_y rate 1{eta(x) != eta(y)} (H(x)^2 + H(y)^2)` around `x`:
    /// the part of the quadratic-variation sum that changes when `x` flips.
    pub fn local_qv(&self, config: &LatticeConfig, idx: usize) -> f64 {
        let ex = config.get(idx);
        self.nbrs[idx]
            .iter()
            .filter(|&&(y, _)| config.get(y) != ex)
            .map(|&(y, r)| r * (self.h[idx] * self.h[idx] + self.h[y] * self.h[y]))
            .sum()
    }

    /// `sum_x sum_y rate (eta(x) - eta(y))^2 H(x)^2`, unscaled.
    pub fn qv_sum(&self, config: &LatticeConfig) -> f64 {
        (0..self.h.len())
            .map(|x| {
                let ex = config.get(x);
                let hx2 = self.h[x] * self.h[x];
                self.nbrs[x].iter().filter(|&&(y, _)| config.get(y) != ex).map(|&(_, r)| r * hx2).sum::<f64>()
            })
            .sum()
    }
}

/// The drift `N^2 L_N pi^N(H)` split by bond class. The four parts add up to
/// the drift exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynkinTerms {
    /// Bonds away from the membrane sites, and the transverse bonds at them.
    pub laplacian: f64,
    /// Bonds from `x_1 = 1` into the plus side.
    pub boundary_plus: f64,
    /// Bonds from `x_1 = 0` into the minus side.
    pub boundary_minus: f64,
    /// Bonds across the membrane.
    pub membrane: f64,
}

impl DynkinTerms {
    pub fn total(&self) -> f64 {
        self.laplacian + self.boundary_plus + self.boundary_minus + self.membrane
    }
}

/// `N^2 L_N pi^N(H)(eta) = N^{2-d} sum_x eta(x) sum_y xi_{xy} (H(y) - H(x))`
/// split into its bond classes.
pub fn dynkin_terms<H: TestFunction + ?Sized>(config: &LatticeConfig, h: &H, rates: &MembraneRates) -> Result<DynkinTerms> {
    let tables = SiteTables::new(config.geometry(), h, rates)?;
    let mut acc = [0.0; 4];
    for idx in config.iter_ones() {
        for (a, c) in acc.iter_mut().zip(tables.coef[idx]) {
            *a += c;
        }
    }
    let scale = tables.n.powi(2 - tables.dim);
    Ok(DynkinTerms {
        laplacian: scale * acc[BondClass::Bulk as usize],
        boundary_plus: scale * acc[BondClass::BoundaryPlus as usize],
        boundary_minus: scale * acc[BondClass::BoundaryMinus as usize],
        membrane: scale * acc[BondClass::Membrane as usize],
    })
}

/// Rate of growth of the quadratic variation of the field:
/// `N^{-d} sum_x sum_{y ~ x} xi_{xy} (eta(x) - eta(y))^2 H(x/N)^2`.
pub fn qv_integrand<H: TestFunction + ?Sized>(config: &LatticeConfig, h: &H, rates: &MembraneRates) -> Result<f64> {
    let tables = SiteTables::new(config.geometry(), h, rates)?;
    Ok(tables.qv_sum(config) * tables.n.powi(-tables.dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_ring_qv() {
        let g = BoxGeometry::ring(0, 4).unwrap();
        let cfg = LatticeConfig::from_fn(g, |x| x[0] % 2 == 0);
        let rates = MembraneRates::new(1.0, 0.0, 1).unwrap();
        let one = |_: &[f64]| 1.0;
        assert_eq!(qv_integrand(&cfg, &one, &rates).unwrap(), 8.0);
    }

    #[test]
    fn constant_function_has_no_drift() {
        let g = BoxGeometry::centered(2, 3).unwrap();
        let cfg = LatticeConfig::from_fn(g, |x| (x[0] + 2 * x[1]).rem_euclid(3) == 0);
        let rates = MembraneRates::new(0.7, 1.0, 5).unwrap();
        let t = dynkin_terms(&cfg, &|_: &[f64]| 2.0, &rates).unwrap();
        assert_eq!(t.total(), 0.0);
    }

    #[test]
    fn missing_mean_at_occupied_site_is_rejected() {
        let g = BoxGeometry::ring(-1, 3).unwrap();
        let cfg = LatticeConfig::filled(g, true);
        let h = |_: &[f64]| 1.0;
        assert!(field_eval(&cfg, &[Some(0.5), None, Some(0.5)], &h, 1).is_err());
        let v = field_eval(&cfg, &[Some(0.5); 3], &h, 1).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }
}
