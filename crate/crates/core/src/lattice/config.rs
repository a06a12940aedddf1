use bitvec::prelude::*;
use rand::Rng;

use super::{BoxGeometry, InitialProfile};
use crate::error::{Error, Result};
use crate::rng::replica_rng;
use crate::testfn::TestFunction;

/// Occupancy of every site of a box at a macroscopic time.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig {
    occupancy: BitVec<u64, Lsb0>,
    geometry: BoxGeometry,
    pub time: f64,
}

impl LatticeConfig {
    pub fn filled(geometry: BoxGeometry, value: bool) -> Self {
        let occupancy = BitVec::repeat(value, geometry.site_count());
        Self { occupancy, geometry, time: 0.0 }
    }

    pub fn from_fn(geometry: BoxGeometry, mut f: impl FnMut(&[i64]) -> bool) -> Self {
        let mut cfg = Self::filled(geometry, false);
        let mut x = vec![0; cfg.geometry.dim()];
        for idx in 0..cfg.geometry.site_count() {
            cfg.geometry.coords_into(idx, &mut x);
            cfg.occupancy.set(idx, f(&x));
        }
        cfg
    }

    /// Configuration encoded in the low bits of `bits` (site `i` is bit `i`).
    pub fn from_bits(geometry: BoxGeometry, bits: u64) -> Self {
        let mut cfg = Self::filled(geometry, false);
        for i in 0..cfg.occupancy.len().min(64) {
            cfg.occupancy.set(i, bits >> i & 1 == 1);
        }
        cfg
    }

    /// Inverse of [`from_bits`](Self::from_bits) for boxes of at most 64 sites.
    pub fn to_bits(&self) -> u64 {
        self.occupancy.iter_ones().filter(|&i| i < 64).fold(0, |acc, i| acc | 1 << i)
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.occupancy[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: bool) {
        self.occupancy.set(idx, v);
    }

    pub fn at(&self, x: &[i64]) -> Result<bool> {
        self.geometry
            .index(x)
            .map(|i| self.get(i))
            .ok_or_else(|| Error::domain(format!("site {x:?} outside the box")))
    }

    pub fn occupied(&self) -> usize {
        self.occupancy.count_ones()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupancy.iter_ones()
    }
}

/// The configuration obtained when `x` copies its neighbor `y`.
pub fn flip(config: &LatticeConfig, x: &[i64], y: &[i64]) -> Result<LatticeConfig> {
    let g = config.geometry();
    if !g.are_neighbors(x, y) {
        return Err(Error::domain(format!("{x:?} and {y:?} are not neighbors in the box")));
    }
    let (ix, iy) = (g.index(x).unwrap(), g.index(y).unwrap());
    let mut out = config.clone();
    out.set(ix, config.get(iy));
    Ok(out)
}

/// Product Bernoulli configuration with density `rho_0(x/N)`.
pub fn sample_initial(profile: &InitialProfile, geometry: &BoxGeometry, n: u64, seed: u64) -> Result<LatticeConfig> {
    sample_initial_with(profile, geometry, n, &mut replica_rng(seed, 0))
}

pub fn sample_initial_with<R: Rng + ?Sized>(
    profile: &InitialProfile,
    geometry: &BoxGeometry,
    n: u64,
    rng: &mut R,
) -> Result<LatticeConfig> {
    profile.validate()?;
    let nf = n as f64;
    let mut cfg = LatticeConfig::filled(geometry.clone(), false);
    for idx in 0..geometry.site_count() {
        let p = profile.at_site(geometry.first_coord(idx), nf);
        let u: f64 = rng.random();
        cfg.set(idx, u < p);
    }
    Ok(cfg)
}

/// `N^{-d} sum_x eta(x) H(x/N)`.
pub fn empirical_pi<H: TestFunction + ?Sized>(config: &LatticeConfig, h: &H, n: u64) -> f64 {
    let g = config.geometry();
    let nf = n as f64;
    let mut x = vec![0; g.dim()];
    let mut buf = Vec::with_capacity(g.dim());
    let sum: f64 = config
        .iter_ones()
        .map(|idx| {
            g.coords_into(idx, &mut x);
            h.at_site(&x, nf, &mut buf)
        })
        .sum();
    sum * nf.powi(-(g.dim() as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSide {
    Both,
    /// Sites with `y_1 >= x_1`.
    Plus,
    /// Sites with `y_1 <= x_1`.
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockAverage {
    pub value: f64,
    pub sites: usize,
    /// The cube did not fit in the torus; each site was counted once.
    pub clipped: bool,
}

/// Mean occupancy over the cube `max_i |y_i - x_i| <= k` around `x`,
/// optionally restricted to one side of `x` in coordinate 1.
pub fn block_average(config: &LatticeConfig, x: &[i64], k: i64, side: BlockSide) -> Result<BlockAverage> {
    if k < 0 {
        return Err(Error::domain("block radius must be nonnegative"));
    }
    let g = config.geometry();
    g.index(x).ok_or_else(|| Error::domain(format!("site {x:?} outside the box")))?;
    let d = g.dim();
    let mut clipped = false;
    // Per axis: admissible offsets, truncated so that no site repeats.
    let offsets: Vec<Vec<i64>> = (0..d)
        .map(|axis| {
            let (lo, hi) = match (axis, side) {
                (0, BlockSide::Plus) => (0, k),
                (0, BlockSide::Minus) => (-k, 0),
                _ => (-k, k),
            };
            let len = g.len_axis(axis) as i64;
            let mut v: Vec<i64> = (lo..=hi).collect();
            if v.len() as i64 > len {
                clipped = true;
                v.sort_by_key(|o| o.abs());
                v.truncate(len as usize);
            }
            v
        })
        .collect();
    let mut total = 0usize;
    let mut ones = 0usize;
    let mut y = vec![0i64; d];
    let mut counter = vec![0usize; d];
    loop {
        for axis in 0..d {
            let raw = x[axis] + offsets[axis][counter[axis]];
            let len = g.len_axis(axis) as i64;
            y[axis] = g.lo()[axis] + (raw - g.lo()[axis]).rem_euclid(len);
        }
        total += 1;
        ones += config.get(g.index(&y).unwrap()) as usize;
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(BlockAverage { value: ones as f64 / total as f64, sites: total, clipped });
            }
            counter[axis] += 1;
            if counter[axis] < offsets[axis].len() {
                break;
            }
            counter[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;

    fn ring(n: usize) -> BoxGeometry {
        BoxGeometry::ring(0, n).unwrap()
    }

    #[test]
    fn flip_copies_neighbor() {
        let cfg = LatticeConfig::from_bits(ring(4), 0b0010);
        let f = flip(&cfg, &[0], &[1]).unwrap();
        assert!(f.at(&[0]).unwrap());
        assert_eq!(flip(&f, &[0], &[1]).unwrap(), f);
        let same = flip(&cfg, &[2], &[3]).unwrap();
        assert_eq!(same, cfg);
        assert!(flip(&cfg, &[0], &[2]).is_err());
    }

    #[test]
    fn constant_profiles_are_deterministic() {
        let g = BoxGeometry::centered(2, 3).unwrap();
        let full = sample_initial(&InitialProfile::Constant { value: 1.0 }, &g, 3, 1).unwrap();
        assert_eq!(full.occupied(), g.site_count());
        let empty = sample_initial(&InitialProfile::Constant { value: 0.0 }, &g, 3, 1).unwrap();
        assert_eq!(empty.occupied(), 0);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let g = BoxGeometry::centered(1, 50).unwrap();
        let p = InitialProfile::Ramp { intercept: 0.5, slope: 0.3 };
        assert_eq!(sample_initial(&p, &g, 10, 9).unwrap(), sample_initial(&p, &g, 10, 9).unwrap());
        let mut rng = replica_rng(9, 0);
        assert_eq!(sample_initial_with(&p, &g, 10, &mut rng).unwrap(), sample_initial(&p, &g, 10, 9).unwrap());
    }

    #[test]
    fn empirical_pi_trivial_cases() {
        let g = BoxGeometry::centered(1, 5).unwrap();
        let zero = LatticeConfig::filled(g.clone(), false);
        assert_eq!(empirical_pi(&zero, &|u: &[f64]| 1.0 + u[0], 5), 0.0);
        let one = LatticeConfig::filled(g, true);
        assert_eq!(empirical_pi(&one, &|_: &[f64]| 0.0, 5), 0.0);
    }

    #[test]
    fn block_average_trivial_cases() {
        let g = BoxGeometry::centered(2, 4).unwrap();
        let ones = LatticeConfig::filled(g.clone(), true);
        for side in [BlockSide::Both, BlockSide::Plus, BlockSide::Minus] {
            assert_eq!(block_average(&ones, &[0, 0], 2, side).unwrap().value, 1.0);
        }
        let cfg = LatticeConfig::from_fn(g, |x| x[0] == 1 && x[1] == -1);
        assert_eq!(block_average(&cfg, &[1, -1], 0, BlockSide::Both).unwrap().value, 1.0);
        assert_eq!(block_average(&cfg, &[0, -1], 0, BlockSide::Both).unwrap().value, 0.0);
        assert!(block_average(&cfg, &[0, 0], -1, BlockSide::Both).is_err());
    }

    #[test]
    fn block_average_counts_one_sided_cardinality() {
        let g = BoxGeometry::centered(2, 4).unwrap();
        let cfg = LatticeConfig::filled(g, true);
        let b = block_average(&cfg, &[0, 0], 2, BlockSide::Plus).unwrap();
        assert_eq!(b.sites, 3 * 5);
        assert!(!b.clipped);
        let c = block_average(&cfg, &[0, 0], 6, BlockSide::Both).unwrap();
        assert!(c.clipped);
        assert_eq!(c.sites, 81);
    }
}
