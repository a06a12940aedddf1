use serde::{Deserialize, Serialize};

use super::rates::MembraneRates;
use crate::error::{Error, Result};

/// A torus truncation of `Z^d`: axis `i` covers `lo[i] .. lo[i] + len[i]`
/// with periodic wrap. Sites are indexed in mixed radix, axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxGeometry {
    lo: Vec<i64>,
    len: Vec<usize>,
}

/// A directed bond `(target, source)`: the target copies the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectedBond {
    pub target: usize,
    pub source: usize,
    pub membrane: bool,
}

impl BoxGeometry {
    pub fn new(lo: Vec<i64>, len: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != len.len() {
            return Err(Error::domain("box needs matching nonempty lo/len vectors"));
        }
        if len.iter().any(|&l| l == 0) {
            return Err(Error::domain("box axes must be nonempty"));
        }
        let sites = len.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l));
        if sites.is_none_or(|s| s > u32::MAX as usize) {
            return Err(Error::config("box has too many sites"));
        }
        Ok(Self { lo, len })
    }

    /// Sites `-half..=half` on every axis.
    pub fn centered(d: usize, half: i64) -> Result<Self> {
        if half < 0 {
            return Err(Error::domain("negative half-width"));
        }
        Self::new(vec![-half; d], vec![(2 * half + 1) as usize; d])
    }

    /// Macroscopic half-width `l`: sites `-l*N ..= l*N` per axis.
    pub fn scaled(d: usize, l: u64, n: u64) -> Result<Self> {
        let half = l.checked_mul(n).filter(|&h| h <= i64::MAX as u64 / 4);
        Self::centered(d, half.ok_or_else(|| Error::config("half-width overflows"))? as i64)
    }

    /// One-dimensional ring of `len` sites starting at coordinate `lo`.
    pub fn ring(lo: i64, len: usize) -> Result<Self> {
        Self::new(vec![lo], vec![len])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn len_axis(&self, axis: usize) -> usize {
        self.len[axis]
    }

    pub fn hi(&self, axis: usize) -> i64 {
        self.lo[axis] + self.len[axis] as i64 - 1
    }

    pub fn site_count(&self) -> usize {
        self.len.iter().product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, &c)| c >= self.lo[i] && c <= self.hi(i))
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (i, &c) in x.iter().enumerate() {
            idx += (c - self.lo[i]) as usize * stride;
            stride *= self.len[i];
        }
        Some(idx)
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.coords_into(idx, &mut out);
        out
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for (i, c) in out.iter_mut().enumerate() {
            *c = self.lo[i] + (idx % self.len[i]) as i64;
            idx /= self.len[i];
        }
    }

    /// Coordinate-1 value of site `idx`.
    pub fn first_coord(&self, idx: usize) -> i64 {
        self.lo[0] + (idx % self.len[0]) as i64
    }

    /// Moves coordinate `axis` by `dir = ±1` with periodic wrap. Returns the
    /// new coordinate and whether the wrap bond was used.
    pub fn shift(&self, axis: usize, c: i64, dir: i64) -> (i64, bool) {
        let n = c + dir;
        if n > self.hi(axis) {
            (self.lo[axis], true)
        } else if n < self.lo[axis] {
            (self.hi(axis), true)
        } else {
            (n, false)
        }
    }

    /// Whether the step from coordinate-1 value `c` in direction `dir`
    /// crosses the membrane (never true for the wrap bond).
    pub fn crosses_membrane(&self, c: i64, dir: i64) -> bool {
        let (n, wrapped) = self.shift(0, c, dir);
        !wrapped && c.min(n) == 0 && c != n
    }

    /// Neighbor of `idx` along `axis` in direction `dir`, or `None` if the
    /// axis has a single site.
    pub fn neighbor(&self, idx: usize, axis: usize, dir: i64) -> Option<usize> {
        if self.len[axis] < 2 {
            return None;
        }
        let stride: usize = self.len[..axis].iter().product();
        let pos = (idx / stride) % self.len[axis];
        let l = self.len[axis];
        let new = if dir > 0 { (pos + 1) % l } else { (pos + l - 1) % l };
        Some(idx - pos * stride + new * stride)
    }

    /// Whether `x` and `y` are neighbors in the torus metric.
    pub fn are_neighbors(&self, x: &[i64], y: &[i64]) -> bool {
        self.bond_between(x, y).is_some()
    }

    /// Finds a bond `(axis, dir)` leading from `x` to `y`, preferring the
    /// non-wrapping one (relevant only for axes of length 2).
    fn bond_between(&self, x: &[i64], y: &[i64]) -> Option<(usize, i64)> {
        if !self.contains(x) || !self.contains(y) {
            return None;
        }
        let diff: Vec<usize> = (0..self.dim()).filter(|&i| x[i] != y[i]).collect();
        if diff.len() != 1 {
            return None;
        }
        let axis = diff[0];
        let mut found = None;
        for dir in [1, -1] {
            if self.len[axis] < 2 {
                continue;
            }
            let (n, wrapped) = self.shift(axis, x[axis], dir);
            if n == y[axis] && (found.is_none() || !wrapped) {
                found = Some((axis, dir));
            }
        }
        found
    }

    /// Rate of the bond between torus neighbors `x` and `y`. The wrap bond in
    /// coordinate 1 is an ordinary rate-1 bond.
    pub fn bond_rate(&self, rates: &MembraneRates, x: &[i64], y: &[i64]) -> Result<f64> {
        let (axis, dir) = self
            .bond_between(x, y)
            .ok_or_else(|| Error::domain(format!("{x:?} and {y:?} are not neighbors in the box")))?;
        if axis == 0 && self.crosses_membrane(x[0], dir) {
            Ok(rates.membrane_rate())
        } else {
            Ok(1.0)
        }
    }

    /// All directed bonds. On an axis of length 2 the direct and the wrap
    /// bond are distinct and both listed.
    pub fn directed_bonds(&self) -> Vec<DirectedBond> {
        let mut out = Vec::with_capacity(self.site_count() * 2 * self.dim());
        for idx in 0..self.site_count() {
            let c1 = self.first_coord(idx);
            for axis in 0..self.dim() {
                for dir in [1, -1] {
                    if let Some(source) = self.neighbor(idx, axis, dir) {
                        let membrane = axis == 0 && self.crosses_membrane(c1, dir);
                        out.push(DirectedBond { target: idx, source, membrane });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centered_box_counts() {
        let g = BoxGeometry::scaled(2, 2, 3).unwrap();
        assert_eq!(g.site_count(), 13 * 13);
        assert_eq!(g.lo(), &[-6, -6]);
    }

    #[test]
    fn membrane_bonds_are_the_zero_one_pairs() {
        let g = BoxGeometry::new(vec![-2, 0], vec![6, 3]).unwrap();
        let bonds = g.directed_bonds();
        assert_eq!(bonds.len(), g.site_count() * 4);
        let mem: Vec<_> = bonds.iter().filter(|b| b.membrane).collect();
        // one pair per transverse site, both directions
        assert_eq!(mem.len(), 2 * 3);
        for b in mem {
            let mut pair = [g.first_coord(b.target), g.first_coord(b.source)];
            pair.sort();
            assert_eq!(pair, [0, 1]);
        }
    }

    #[test]
    fn wrap_bond_has_unit_rate() {
        let g = BoxGeometry::ring(-2, 6).unwrap();
        let r = MembraneRates::new(1.0, 2.0, 4).unwrap();
        assert_eq!(g.bond_rate(&r, &[3], &[-2]).unwrap(), 1.0);
        assert_eq!(g.bond_rate(&r, &[0], &[1]).unwrap(), r.membrane_rate());
        assert!(g.bond_rate(&r, &[0], &[2]).is_err());
    }

    #[test]
    fn single_site_box_has_no_bonds() {
        let g = BoxGeometry::centered(3, 0).unwrap();
        assert!(g.directed_bonds().is_empty());
    }

    proptest! {
        #[test]
        fn index_is_a_bijection(lo in prop::collection::vec(-4i64..4, 1..4), seed_len in prop::collection::vec(1usize..5, 4)) {
            let len: Vec<usize> = seed_len[..lo.len()].to_vec();
            let g = BoxGeometry::new(lo, len).unwrap();
            for idx in 0..g.site_count() {
                let x = g.coords(idx);
                prop_assert_eq!(g.index(&x), Some(idx));
            }
        }

        #[test]
        fn neighbor_is_involutive(idx in 0usize..60, axis in 0usize..3) {
            let g = BoxGeometry::new(vec![-1, 0, -2], vec![5, 3, 4]).unwrap();
            let idx = idx % g.site_count();
            let up = g.neighbor(idx, axis, 1).unwrap();
            prop_assert_eq!(g.neighbor(up, axis, -1), Some(idx));
            let (x, y) = (g.coords(idx), g.coords(up));
            prop_assert!(g.are_neighbors(&x, &y));
        }
    }
}
