use membrane_voter::lattice::Regime;
use membrane_voter::pde::{feynman_kac, solve_1d, solve_1d_with, trace_average, weak_residual, InterfaceCondition, OneSided, PiecewiseTestFunction, Scheme, SolveOptions};
use membrane_voter::snapping::SnappingParams;
use membrane_voter::{InitialProfile, Side};
use proptest::prelude::*;

#[test]
fn neumann_halves_evolve_like_the_reflected_heat_equation() {
    // The even Gaussian on the plus side is its own reflection.
    let t = 0.1;
    let init = |u: f64, side| if side == Side::Plus { (-u * u).exp() } else { 0.2 };
    let s = solve_1d_with(init, t, &InterfaceCondition::Neumann, 0.01, 0.001, &SolveOptions::default()).unwrap();
    let exact = |u: f64| (-u * u / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t).sqrt();
    for u in [0.0, 0.3, 1.0, 2.5] {
        assert!((s.grid.value_at(u, Side::Plus) - exact(u)).abs() < 1e-4, "u {u}");
        assert!((s.grid.value_at(-u, Side::Minus) - 0.2).abs() < 1e-12);
    }
}

#[test]
fn robin_profile_matches_feynman_kac() {
    let rho0 = InitialProfile::Step { plus: 0.9, minus: 0.1 };
    let t = 0.2;
    let s = solve_1d::<f64>(&rho0, t, &InterfaceCondition::Robin { alpha: 1.0 }, 0.005, 0.0005, &SolveOptions::default()).unwrap();
    let params = SnappingParams::new(1.0, Regime::Critical).unwrap();
    for (u, side) in [(-0.5, Side::Minus), (0.0, Side::Minus), (0.0, Side::Plus), (0.5, Side::Plus)] {
        let fk = feynman_kac(&[u], Some(side), t, &rho0, &params, 40_000, 2).unwrap();
        let pde = s.grid.value_at(u, side);
        assert!((fk.mean - pde).abs() <= 4.0 * fk.stderr + 2e-3, "u {u} {side:?}: {fk:?} vs {pde}");
    }
}

#[test]
fn weak_residual_shrinks_under_refinement() {
    // c = alpha (1 - 0.3) makes the test function compatible with the Robin condition.
    let h = PiecewiseTestFunction::new(
        OneSided::smooth(Side::Plus, |x: f64| (-x * x).exp() * (1.0 + 0.7 * x)),
        OneSided::smooth(Side::Minus, |x: f64| (-x * x).exp() * (0.3 + 0.7 * x)),
        6.0,
    )
    .unwrap();
    let rho0 = InitialProfile::Ramp { intercept: 0.5, slope: 0.4 };
    let cond = InterfaceCondition::Robin { alpha: 1.0 };
    let res: Vec<f64> = [0.04, 0.02]
        .iter()
        .map(|&dx| {
            let opts = SolveOptions { record_path: true, ..Default::default() };
            let s = solve_1d::<f64>(&rho0, 0.1, &cond, dx, dx / 10.0, &opts).unwrap();
            weak_residual(&s.path, &h, 0.1, &cond).unwrap().abs()
        })
        .collect();
    assert!(res[0] / res[1] >= 2.0, "{res:?}");
}

#[test]
fn trace_averages_approach_the_one_sided_values() {
    let rho0 = InitialProfile::Step { plus: 0.7, minus: 0.2 };
    let s = solve_1d::<f64>(&rho0, 0.05, &InterfaceCondition::Robin { alpha: 2.0 }, 0.002, 0.0005, &SolveOptions::default()).unwrap();
    for side in [Side::Plus, Side::Minus] {
        let tr = s.grid.trace(side);
        let far = (trace_average(&s.grid, 0.1, side).unwrap() - tr).abs();
        let near = (trace_average(&s.grid, 0.01, side).unwrap() - tr).abs();
        assert!(near < far && near < 5e-3, "{side:?}: {near} {far}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn backward_euler_obeys_the_maximum_principle(a in 0.0f64..1.0, b in -0.5f64..0.5, alpha in 0.1f64..5.0) {
        let rho0 = InitialProfile::Ramp { intercept: a, slope: b };
        let opts = SolveOptions { scheme: Scheme::BackwardEuler, window: 3.0, clip: false, record_path: false };
        let init = membrane_voter::pde::Grid1D::from_fn(0.05, 60, |u: f64, side| rho0.value_signed(u, side));
        let lo = init.nodes().map(|n| n.2).fold(f64::INFINITY, f64::min);
        let hi = init.nodes().map(|n| n.2).fold(f64::NEG_INFINITY, f64::max);
        let s = solve_1d::<f64>(&rho0, 0.2, &InterfaceCondition::Robin { alpha }, 0.05, 0.01, &opts).unwrap();
        for (_, _, v) in s.grid.nodes() {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
        let m0 = init.mass();
        prop_assert!((s.grid.mass() - m0).abs() < 1e-9);
    }
}
