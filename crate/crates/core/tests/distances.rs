use proptest::prelude::*;

use subkoba::chart::{heisenberg, unit_disc, C64};
use subkoba::distances::{
    horizontal_disc_from_free_part, infinitesimal_metric_upper, kobayashi_upper, poincare_distance, schwarz_lower_bound,
    DiscConfig, KobayashiConfig, RhoKind,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn in_disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, a)| C64::from_polar(m, a))
}

fn mobius(p: C64, z: C64) -> C64 {
    (z - p) / (C64::new(1.0, 0.0) - p.conj() * z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poincare_triangle(a in in_disc(0.95), b in in_disc(0.95), m in in_disc(0.95)) {
        let d = |x, y| poincare_distance(x, y).unwrap();
        prop_assert!(d(a, b) <= d(a, m) + d(m, b) + 1e-12);
        prop_assert!((d(a, b) - d(b, a)).abs() < 1e-12);
    }

    #[test]
    fn poincare_invariance(a in in_disc(0.9), b in in_disc(0.9), p in in_disc(0.9)) {
        let d = |x, y| poincare_distance(x, y).unwrap();
        prop_assert!((d(mobius(p, a), mobius(p, b)) - d(a, b)).abs() < 1e-9);
        // Holomorphic self-maps of the disc do not increase distance.
        prop_assert!(d(a * a, b * b) <= d(a, b) + 1e-12);
        prop_assert!(d(a * 0.5, b * 0.5) <= d(a, b) + 1e-12);
    }

    #[test]
    fn heisenberg_discs_are_horizontal(f1 in proptest::collection::vec(in_disc(0.5), 1..5), f2 in proptest::collection::vec(in_disc(0.5), 1..5), z3 in in_disc(0.5)) {
        let h = heisenberg(1.0);
        let z0 = [f1[0], f2[0], z3];
        let disc = horizontal_disc_from_free_part(&h, &[f1, f2], &z0, &DiscConfig::default()).unwrap();
        prop_assert!(disc.residual <= 1e-8);
        // f₃' = f₁ f₂' checked on a circle independently of the solver.
        for k in 0..16 {
            let zeta = C64::from_polar(0.7, k as f64 * std::f64::consts::TAU / 16.0);
            let (v, dv) = (disc.eval(zeta), disc.derivative(zeta));
            prop_assert!((dv[2] - v[0] * dv[1]).norm() < 1e-8);
        }
        prop_assert!((disc.eval(c(0.0, 0.0))[2] - z3).norm() < 1e-15);
    }
}

#[test]
fn disc_estimates_match_poincare() {
    let cfg = KobayashiConfig::default();
    let delta = unit_disc();
    let mut last = 0.0;
    for r in [0.1, 0.3, 0.5, 0.7] {
        let est = kobayashi_upper(&delta, &[c(0.0, 0.0)], &[c(r, 0.0)], &cfg).unwrap().value.unwrap();
        let exact = poincare_distance(c(0.0, 0.0), c(r, 0.0)).unwrap();
        assert!(est >= exact - 1e-9 && est <= exact + 1e-3, "r = {r}: {est} vs {exact}");
        assert!(est > last);
        last = est;
    }
    // Off-centre pairs need higher degree to approach the Möbius extremal.
    let (x, y) = (c(0.2, -0.3), c(-0.4, 0.1));
    let exact = poincare_distance(x, y).unwrap();
    let mut prev = f64::INFINITY;
    for degree in [4, 8] {
        let cfg = KobayashiConfig { degree, ..Default::default() };
        let est = kobayashi_upper(&delta, &[x], &[y], &cfg).unwrap().value.unwrap();
        assert!(est >= exact - 1e-9 && est <= prev + 1e-9, "degree {degree}: {est} vs {exact}");
        prev = est;
    }
    assert!(prev <= exact + 1e-3, "{prev} vs {exact}");
}

#[test]
fn short_distances_follow_the_metric() {
    let delta = unit_disc();
    let x = c(0.3, 0.0);
    let exact = 2.0 / (1.0 - 0.09);
    let cfg = KobayashiConfig { degree: 8, ..Default::default() };
    let k = infinitesimal_metric_upper(&delta, &[x], &[c(1.0, 0.0)], &cfg).unwrap().value;
    assert!(k >= exact - 1e-9 && k < exact + 1e-3, "{k}");
    let cfg = KobayashiConfig::default();
    let k = infinitesimal_metric_upper(&delta, &[x], &[c(1.0, 0.0)], &cfg).unwrap().value;
    let eps = 1e-3;
    let d = kobayashi_upper(&delta, &[x], &[x + eps], &cfg).unwrap().value.unwrap();
    assert!((d / eps - k).abs() < 1e-2 * k, "{} vs {k}", d / eps);
}

#[test]
fn schwarz_below_estimate() {
    let cfg = KobayashiConfig::default();
    let delta = unit_disc();
    for r in [0.2, 0.6] {
        let d = kobayashi_upper(&delta, &[c(0.0, 0.0)], &[c(r, 0.0)], &cfg).unwrap().value.unwrap();
        let rho = 2f64.sqrt() * poincare_distance(c(0.0, 0.0), c(r, 0.0)).unwrap();
        let lower = schwarz_lower_bound(0.5, rho, RhoKind::Exact).unwrap().value;
        assert!(lower <= d + 1e-9);
    }
}
