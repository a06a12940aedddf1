use rand::Rng;
use rand_distr::Exp1;

use crate::lattice::{BoxGeometry, MembraneRates};

/// Where a walk lives: all of `Z^d`, or a torus box.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Lattice,
    Torus(BoxGeometry),
}

impl Space {
    /// The coordinate-1 factor of the space.
    pub fn first_axis(&self) -> Space {
        match self {
            Space::Lattice => Space::Lattice,
            Space::Torus(g) => Space::Torus(
                BoxGeometry::new(vec![g.lo()[0]], vec![g.len_axis(0)]).expect("axis of a valid box"),
            ),
        }
    }
}

/// Continuous-time walk on `Z^d` (or a torus) in which every nearest-neighbor
/// jump has rate 1 except the `0 <-> 1` jump of coordinate 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkD {
    pub coords: Vec<i64>,
    membrane_rate: f64,
    space: Space,
}

impl WalkD {
    pub fn new(coords: Vec<i64>, rates: &MembraneRates, space: Space) -> Self {
        Self::with_membrane_rate(coords, rates.membrane_rate(), space)
    }

    /// Walk with an explicit slow-bond rate (0 blocks the bond).
    pub fn with_membrane_rate(coords: Vec<i64>, membrane_rate: f64, space: Space) -> Self {
        assert!(membrane_rate >= 0.0 && membrane_rate.is_finite());
        if let Space::Torus(g) = &space {
            assert!(g.contains(&coords), "walk starts outside its torus");
        }
        Self { coords, membrane_rate, space }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn membrane_rate(&self) -> f64 {
        self.membrane_rate
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    #[inline]
    fn move_rate(&self, axis: usize, dir: i64) -> f64 {
        let c = self.coords[axis];
        match &self.space {
            Space::Lattice => {
                if axis == 0 && c.min(c + dir) == 0 {
                    self.membrane_rate
                } else {
                    1.0
                }
            }
            Space::Torus(g) => {
                if g.len_axis(axis) < 2 {
                    0.0
                } else if axis == 0 && g.crosses_membrane(c, dir) {
                    self.membrane_rate
                } else {
                    1.0
                }
            }
        }
    }

    /// Total jump rate at the current position.
    #[inline]
    pub fn total_rate(&self) -> f64 {
        (0..self.dim()).map(|a| self.move_rate(a, 1) + self.move_rate(a, -1)).sum()
    }

    #[inline]
    fn apply(&mut self, axis: usize, dir: i64) {
        self.coords[axis] = match &self.space {
            Space::Lattice => self.coords[axis] + dir,
            Space::Torus(g) => g.shift(axis, self.coords[axis], dir).0,
        };
    }

    /// Makes one jump chosen proportionally to its rate, given the total.
    /// Returns the `(axis, dir)` taken.
    #[inline]
    pub fn jump<R: Rng + ?Sized>(&mut self, total: f64, rng: &mut R) -> (usize, i64) {
        let mut u = rng.random::<f64>() * total;
        let mut last = (0, 1);
        for axis in 0..self.dim() {
            for dir in [1, -1] {
                let r = self.move_rate(axis, dir);
                if r > 0.0 {
                    last = (axis, dir);
                    if u < r {
                        self.apply(axis, dir);
                        return (axis, dir);
                    }
                    u -= r;
                }
            }
        }
        // Rounding fell off the end: take the last admissible move.
        self.apply(last.0, last.1);
        last
    }
}

/// Advances `walk` exactly by `dt` units of microscopic time.
pub fn step_walk<R: Rng + ?Sized>(walk: &mut WalkD, dt: f64, rng: &mut R) {
    let mut t = 0.0;
    loop {
        let total = walk.total_rate();
        if total <= 0.0 {
            return;
        }
        t += rng.sample::<f64, _>(Exp1) / total;
        if t > dt {
            return;
        }
        walk.jump(total, rng);
    }
}

/// Walk held at its origin until `freeze_until`, then moving freely.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenWalk {
    pub walk: WalkD,
    pub freeze_until: f64,
    pub origin: Vec<i64>,
}

impl FrozenWalk {
    pub fn new(walk: WalkD, freeze_until: f64) -> Self {
        let origin = walk.coords.clone();
        Self { walk, freeze_until, origin }
    }
}

/// A free walker and a frozen walker that coalesce at their first meeting
/// after the freeze ends.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalescingPair {
    pub walker: WalkD,
    pub frozen: FrozenWalk,
    pub met: bool,
    /// Absolute microscopic time of coalescence.
    pub meet_time: Option<f64>,
    pub time: f64,
}

impl CoalescingPair {
    pub fn new(walker: WalkD, frozen: FrozenWalk) -> Self {
        let mut pair = Self { walker, frozen, met: false, meet_time: None, time: 0.0 };
        if pair.frozen.freeze_until <= 0.0 && pair.walker.coords == pair.frozen.walk.coords {
            pair.met = true;
            pair.meet_time = Some(0.0);
        }
        pair
    }

    fn mark_met(&mut self) {
        self.met = true;
        self.meet_time = Some(self.time);
    }

    /// Runs the pair up to absolute microscopic time `t_end`.
    pub fn run_until<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) {
        while self.time < t_end {
            if self.met {
                step_walk(&mut self.walker, t_end - self.time, rng);
                self.frozen.walk.coords.clone_from(&self.walker.coords);
                self.time = t_end;
                return;
            }
            if self.time < self.frozen.freeze_until {
                let stop = self.frozen.freeze_until.min(t_end);
                step_walk(&mut self.walker, stop - self.time, rng);
                self.time = stop;
                if self.time >= self.frozen.freeze_until && self.walker.coords == self.frozen.walk.coords {
                    self.mark_met();
                }
                continue;
            }
            let r1 = self.walker.total_rate();
            let r2 = self.frozen.walk.total_rate();
            let total = r1 + r2;
            if total <= 0.0 {
                self.time = t_end;
                return;
            }
            let t = self.time + rng.sample::<f64, _>(Exp1) / total;
            if t > t_end {
                self.time = t_end;
                return;
            }
            self.time = t;
            if rng.random::<f64>() * total < r1 {
                self.walker.jump(r1, rng);
            } else {
                self.frozen.walk.jump(r2, rng);
            }
            if self.walker.coords == self.frozen.walk.coords {
                self.mark_met();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use crate::stats::chi_square_p_value;

    #[test]
    fn unit_rates_give_uniform_first_jump() {
        let mut counts = [0.0; 6];
        let draws = 100_000u64;
        for r in 0..draws {
            let mut rng = replica_rng(5, r);
            let mut w = WalkD::with_membrane_rate(vec![0, 0, 0], 1.0, Space::Lattice);
            let total = w.total_rate();
            let (axis, dir) = w.jump(total, &mut rng);
            counts[2 * axis + usize::from(dir < 0)] += 1.0;
        }
        let expected = [draws as f64 / 6.0; 6];
        assert!(chi_square_p_value(&counts, &expected) > 0.01);
    }

    #[test]
    fn blocked_bond_is_never_crossed() {
        let mut rng = replica_rng(2, 0);
        let mut w = WalkD::with_membrane_rate(vec![5, 0], 0.0, Space::Lattice);
        for _ in 0..2000 {
            let total = w.total_rate();
            w.jump(total, &mut rng);
            assert!(w.coords[0] >= 1);
        }
    }

    #[test]
    fn first_coordinate_jump_from_one_is_a_race() {
        // Starting at x_1 = 1 in d = 1 with slow rate 0.1: P(first jump to 0)
        // = 0.1 / 1.1.
        let rates = MembraneRates::new(1.0, 1.0, 10).unwrap();
        let draws = 100_000u64;
        let mut down = 0u64;
        for r in 0..draws {
            let mut rng = replica_rng(8, r);
            let mut w = WalkD::new(vec![1], &rates, Space::Lattice);
            let total = w.total_rate();
            w.jump(total, &mut rng);
            down += u64::from(w.coords[0] == 0);
        }
        let p = 0.1 / 1.1;
        let freq = down as f64 / draws as f64;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt(), "{freq}");
    }

    #[test]
    fn torus_walk_stays_inside() {
        let g = BoxGeometry::ring(-2, 6).unwrap();
        let mut w = WalkD::with_membrane_rate(vec![3], 0.5, Space::Torus(g.clone()));
        let mut rng = replica_rng(1, 1);
        step_walk(&mut w, 50.0, &mut rng);
        assert!(g.contains(&w.coords));
    }

    #[test]
    fn coincident_unfrozen_pair_starts_coalesced() {
        let w = WalkD::with_membrane_rate(vec![2], 1.0, Space::Lattice);
        let pair = CoalescingPair::new(w.clone(), FrozenWalk::new(w, 0.0));
        assert!(pair.met);
        assert_eq!(pair.meet_time, Some(0.0));
    }

    #[test]
    fn coalesced_pair_moves_together() {
        let mut rng = replica_rng(3, 0);
        let a = WalkD::with_membrane_rate(vec![0], 1.0, Space::Lattice);
        let b = WalkD::with_membrane_rate(vec![1], 1.0, Space::Lattice);
        let mut pair = CoalescingPair::new(a, FrozenWalk::new(b, 0.0));
        let mut t = 0.0;
        while !pair.met {
            t += 1.0;
            pair.run_until(t, &mut rng);
        }
        for k in 0..20 {
            pair.run_until(t + k as f64, &mut rng);
            assert_eq!(pair.walker.coords, pair.frozen.walk.coords);
        }
    }

    #[test]
    fn no_meeting_during_freeze() {
        let mut rng = replica_rng(4, 0);
        let a = WalkD::with_membrane_rate(vec![1], 1.0, Space::Lattice);
        let b = WalkD::with_membrane_rate(vec![0], 1.0, Space::Lattice);
        let mut pair = CoalescingPair::new(a, FrozenWalk::new(b, 5.0));
        pair.run_until(4.999, &mut rng);
        assert!(!pair.met);
        assert_eq!(pair.frozen.walk.coords, vec![0]);
    }
}
