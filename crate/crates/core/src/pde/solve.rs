//! Finite differences for the heat equation on two half-lines coupled at 0.
//!
//! Each side carries its own node at 0; the interface condition enters
//! through ghost values `rho_{+-1}` eliminated with the centered flux. The
//! window edges are reflecting.

use serde::{Deserialize, Serialize};

use super::grid::{Grid1D, InterfaceCondition};
use crate::error::{Error, Result};
use crate::lattice::{InitialProfile, Side};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Crank–Nicolson with two backward-Euler half-steps at the start.
    CrankNicolson,
    BackwardEuler,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Half-width of the computational window.
    pub window: f64,
    /// Clamp values to `[0, 1]` after each step (for densities).
    pub clip: bool,
    /// Keep the grid after every step.
    pub record_path: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { scheme: Scheme::CrankNicolson, window: 6.0, clip: true, record_path: false }
    }
}

/// One-sided fluxes at the interface after a time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceDiagnostics<T> {
    pub t: T,
    pub flux_plus: T,
    pub flux_minus: T,
    /// `alpha (rho(0+) - rho(0-))`.
    pub jump_flux: T,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub grid: Grid1D<T>,
    /// Grids after every step (starting with the initial data) when
    /// requested.
    pub path: Vec<Grid1D<T>>,
    /// Interface fluxes after every step (not at `t = 0`).
    pub interface: Vec<InterfaceDiagnostics<T>>,
    /// Largest excursion outside `[0, 1]` before clipping.
    pub max_violation: T,
    pub clipped_nodes: usize,
    pub steps: usize,
}

/// Tridiagonal matrix rows `(sub, diag, sup)`.
struct Tridiagonal<T> {
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    fn apply(&self, v: &[T], out: &mut [T]) {
        let n = v.len();
        for i in 0..n {
            let mut s = self.b[i] * v[i];
            if i > 0 {
                s = s + self.a[i] * v[i - 1];
            }
            if i + 1 < n {
                s = s + self.c[i] * v[i + 1];
            }
            out[i] = s;
        }
    }

    /// Solves `(I - k A) x = rhs` by the Thomas algorithm.
    fn solve_shifted(&self, k: T, rhs: &[T], x: &mut [T], scratch: &mut [T]) {
        let n = rhs.len();
        let diag = |i: usize| T::one() - k * self.b[i];
        let sub = |i: usize| -k * self.a[i];
        let sup = |i: usize| -k * self.c[i];
        let mut beta = diag(0);
        x[0] = rhs[0] / beta;
        for i in 1..n {
            scratch[i] = sup(i - 1) / beta;
            beta = diag(i) - sub(i) * scratch[i];
            x[i] = (rhs[i] - sub(i) * x[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - scratch[i + 1] * x[i + 1];
        }
    }
}

/// Discrete Laplacian with the interface rows. Layout: coupled conditions
/// use `[minus (m+1), plus (m+1)]`; `None` merges the two interface nodes.
fn operator<T: Scalar>(m: usize, dx: T, cond: &InterfaceCondition) -> Tridiagonal<T> {
    let h2 = dx * dx;
    let one = T::one() / h2;
    let two = T::lit(2.0) / h2;
    let n = if matches!(cond, InterfaceCondition::None) { 2 * m + 1 } else { 2 * m + 2 };
    let mut a = vec![one; n];
    let mut b = vec![-two; n];
    let mut c = vec![one; n];
    a[0] = T::zero();
    c[0] = two;
    a[n - 1] = two;
    c[n - 1] = T::zero();
    if !matches!(cond, InterfaceCondition::None) {
        let k = T::lit(2.0) * T::lit(cond.coupling()) / dx;
        // 0^- row: (2 rho_{-1} - 2 rho_0^- + 2 dx F) / dx^2, F = alpha [rho].
        a[m] = two;
        b[m] = -two - k;
        c[m] = k;
        // 0^+ row: (2 rho_1 - 2 rho_0^+ - 2 dx F) / dx^2.
        a[m + 1] = k;
        b[m + 1] = -two - k;
        c[m + 1] = two;
    }
    Tridiagonal { a, b, c }
}

fn pack<T: Scalar>(g: &Grid1D<T>, cond: &InterfaceCondition) -> Vec<T> {
    let mut v = g.minus.clone();
    if matches!(cond, InterfaceCondition::None) {
        v.extend_from_slice(&g.plus[1..]);
    } else {
        v.extend_from_slice(&g.plus);
    }
    v
}

fn unpack<T: Scalar>(v: &[T], m: usize, g: &mut Grid1D<T>, cond: &InterfaceCondition) {
    g.minus.copy_from_slice(&v[..=m]);
    if matches!(cond, InterfaceCondition::None) {
        g.plus.copy_from_slice(&v[m..]);
    } else {
        g.plus.copy_from_slice(&v[m + 1..]);
    }
}

/// Solves from initial data `init(u, side)` up to time `t`.
pub fn solve_1d_with<T: Scalar>(
    init: impl Fn(T, Side) -> T,
    t: T,
    cond: &InterfaceCondition,
    dx: T,
    dt: T,
    opts: &SolveOptions,
) -> Result<Solution<T>> {
    cond.validate()?;
    if !(t >= T::zero()) {
        return Err(Error::domain("time must be nonnegative"));
    }
    if !(dx > T::zero() && dt > T::zero()) {
        return Err(Error::config("dx and dt must be positive"));
    }
    let m = (T::lit(opts.window) / dx).round().to_usize().unwrap_or(0);
    if m < 2 {
        return Err(Error::config("window must span at least two cells per side"));
    }
    let alpha = T::lit(cond.coupling());
    if opts.scheme == Scheme::Explicit {
        let limit = dx * dx / (T::lit(2.0) + T::lit(2.0) * dx * alpha);
        if dt > limit {
            return Err(Error::config(format!("explicit scheme unstable: dt = {dt} exceeds {limit}")));
        }
    }
    let mut grid = Grid1D::from_fn(dx, m, &init);
    if matches!(cond, InterfaceCondition::None) {
        // A single node at 0; discontinuous data take the midpoint value.
        let v = (grid.minus[m] + grid.plus[0]) * T::lit(0.5);
        grid.minus[m] = v;
        grid.plus[0] = v;
    }
    let steps = if t == T::zero() { 0 } else { (t / dt).ceil().to_usize().unwrap_or(1).max(1) };
    let dt = if steps == 0 { dt } else { t / T::from_usize_lossy(steps) };
    let op = operator(m, dx, cond);
    let mut v = pack(&grid, cond);
    let n = v.len();
    let (mut rhs, mut next, mut scratch) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut sol = Solution {
        grid: grid.clone(),
        path: Vec::new(),
        interface: Vec::with_capacity(steps),
        max_violation: T::zero(),
        clipped_nodes: 0,
        steps,
    };
    if opts.record_path {
        sol.path.push(grid.clone());
    }
    let half = T::lit(0.5);
    let tol = T::lit(1e-9);
    for step in 0..steps {
        match opts.scheme {
            Scheme::Explicit => {
                op.apply(&v, &mut rhs);
                for i in 0..n {
                    v[i] = v[i] + dt * rhs[i];
                }
            }
            Scheme::BackwardEuler => {
                op.solve_shifted(dt, &v, &mut next, &mut scratch);
                std::mem::swap(&mut v, &mut next);
            }
            Scheme::CrankNicolson if step < 2 => {
                for _ in 0..2 {
                    op.solve_shifted(dt * half, &v, &mut next, &mut scratch);
                    std::mem::swap(&mut v, &mut next);
                }
            }
            Scheme::CrankNicolson => {
                op.apply(&v, &mut rhs);
                for i in 0..n {
                    rhs[i] = v[i] + dt * half * rhs[i];
                }
                op.solve_shifted(dt * half, &rhs, &mut next, &mut scratch);
                std::mem::swap(&mut v, &mut next);
            }
        }
        for x in v.iter_mut() {
            let excess = (*x - T::one()).max(-*x);
            if excess > sol.max_violation {
                sol.max_violation = excess;
            }
            if opts.clip && excess > tol {
                *x = x.max(T::zero()).min(T::one());
                sol.clipped_nodes += 1;
            }
        }
        unpack(&v, m, &mut grid, cond);
        grid.time = dt * T::from_usize_lossy(step + 1);
        let (fp, fm) = grid.one_sided_fluxes();
        sol.interface.push(InterfaceDiagnostics {
            t: grid.time,
            flux_plus: fp,
            flux_minus: fm,
            jump_flux: alpha * (grid.trace(Side::Plus) - grid.trace(Side::Minus)),
        });
        if opts.record_path {
            sol.path.push(grid.clone());
        }
    }
    sol.grid = grid;
    Ok(sol)
}

/// Solves with an initial profile depending on `u_1` only.
pub fn solve_1d<T: Scalar>(
    rho0: &InitialProfile,
    t: T,
    cond: &InterfaceCondition,
    dx: T,
    dt: T,
    opts: &SolveOptions,
) -> Result<Solution<T>> {
    rho0.validate()?;
    solve_1d_with(|u: T, side| T::lit(rho0.value_signed(u.as_f64(), side)), t, cond, dx, dt, opts)
}
