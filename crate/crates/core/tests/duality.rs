use membrane_voter::fluctuation::qv_integrand;
use membrane_voter::lattice::{sample_initial_with, VoterEngine};
use membrane_voter::master::MasterEquation;
use membrane_voter::stats::replicate;
use membrane_voter::walks::{coalescence_probability, one_point_function, pair_correlation_qv, two_point_function, Space};
use membrane_voter::{BoxGeometry, InitialProfile, MembraneRates};

fn ramp() -> InitialProfile {
    InitialProfile::Ramp { intercept: 0.5, slope: 0.3 }
}

fn ring() -> BoxGeometry {
    BoxGeometry::ring(-2, 6).unwrap()
}

#[test]
fn one_point_function_matches_master_equation() {
    let g = ring();
    for beta in [0.0, 2.0] {
        let rates = MembraneRates::new(1.0, beta, 2).unwrap();
        let me = MasterEquation::new(&g, &rates).unwrap();
        let p = me.evolve(&me.product_measure(&ramp(), 2), 0.4);
        for x in [-2, 0, 1, 3] {
            let exact = me.mean_occupation(&p, &[x]).unwrap();
            let est = one_point_function(&[x], 0.4, &rates, &Space::Torus(g.clone()), &ramp(), 20_000, 3).unwrap();
            assert!((est.mean - exact).abs() <= 4.0 * est.stderr + 1e-12, "beta {beta} x {x}: {est:?} vs {exact}");
        }
    }
}

#[test]
fn two_time_correlation_matches_master_equation() {
    let g = ring();
    let rates = MembraneRates::new(0.5, 1.0, 2).unwrap();
    let me = MasterEquation::new(&g, &rates).unwrap();
    let p0 = me.product_measure(&ramp(), 2);
    let (t, s) = (0.5, 0.2);
    for (x, y) in [([0], [1]), ([1], [1]), ([-2], [3])] {
        let exact = me.two_time_occupation(&p0, &x, t, &y, s).unwrap();
        let est = two_point_function(&x, &y, t, s, &rates, &Space::Torus(g.clone()), &ramp(), 30_000, 8).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{x:?} {y:?}: {est:?} vs {exact}");
    }
}

#[test]
fn pair_correlation_matches_direct_simulation_of_the_qv_integrand() {
    let g = ring();
    let rates = MembraneRates::new(1.0, 1.0, 2).unwrap();
    let t = 0.3;
    let n = rates.n;
    let h = |u: &[f64]| 1.0 + 0.5 * u[0];
    // E[qv_integrand] = N^{-d} sum_x H(x/N)^2 sum_y xi_xy E[(eta(x) - eta(y))^2].
    let mut dual = 0.0;
    let mut var = 0.0;
    for x in g.lo()[0]..=g.hi(0) {
        let pc = pair_correlation_qv(&[x], t, &rates, &Space::Torus(g.clone()), &ramp(), 20_000, (x + 40) as u64).unwrap();
        let w = h(&[x as f64 / n as f64]).powi(2) / n as f64;
        dual += w * pc.weighted.mean;
        var += (w * pc.weighted.stderr).powi(2);
    }
    let direct = replicate(40_000, 12, |rng, _| {
        let init = sample_initial_with(&ramp(), &g, n, rng).unwrap();
        let mut e = VoterEngine::new(init, &rates).unwrap();
        e.run_until(t, rng, |_| {});
        qv_integrand(e.config(), &h, &rates).unwrap()
    })
    .estimate();
    let me = MasterEquation::new(&g, &rates).unwrap();
    let p = me.evolve(&me.product_measure(&ramp(), n), t);
    let cfg = |s: u64| membrane_voter::LatticeConfig::from_bits(g.clone(), s);
    let exact = me.expect(&p, |s| qv_integrand(&cfg(s), &h, &rates).unwrap());
    let se = (var + direct.stderr.powi(2)).sqrt();
    assert!((dual - direct.mean).abs() <= 3.0 * se, "{dual} vs {direct:?}");
    assert!((direct.mean - exact).abs() <= 4.0 * direct.stderr, "{direct:?} vs {exact}");
}

#[test]
fn slow_membrane_suppresses_coalescence_across_it() {
    let rates = |beta| MembraneRates::new(1.0, beta, 20).unwrap();
    let p = |beta| coalescence_probability(&[0], &[1], 0.05, &rates(beta), &Space::Lattice, 20_000, 1).unwrap().mean;
    let (free, slow) = (p(0.0), p(3.0));
    assert!(free > slow + 0.1, "{free} {slow}");
    // Same-side pair is unaffected by the membrane.
    let same = |beta| coalescence_probability(&[3], &[4], 0.001, &rates(beta), &Space::Lattice, 20_000, 2).unwrap();
    let (a, b) = (same(0.0), same(3.0));
    assert!((a.mean - b.mean).abs() <= 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
}

#[test]
fn ring_and_line_agree_away_from_the_wrap() {
    // Over a short time the walk does not feel the far side of a large ring.
    let rates = MembraneRates::new(1.0, 1.0, 10).unwrap();
    let big = BoxGeometry::ring(-200, 400).unwrap();
    let a = one_point_function(&[2], 0.05, &rates, &Space::Lattice, &ramp(), 30_000, 1).unwrap();
    let b = one_point_function(&[2], 0.05, &rates, &Space::Torus(big), &ramp(), 30_000, 2).unwrap();
    assert!((a.mean - b.mean).abs() <= 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt(), "{a:?} {b:?}");
}
