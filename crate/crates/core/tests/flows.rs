use proptest::prelude::*;

use subkoba::chart::{heisenberg, ChartDistribution, ChartDomain, Polynomial, VectorField, C64};
use subkoba::flows::{chow_connect, compose_flows, integrate_complex_flow, replay, ConnectConfig, FlowStage, StepConfig};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `∂₁ + z₁² ∂₂`, with flow `(a + t, b + ((a + t)³ - a³)/3)`.
fn cubic_field() -> VectorField {
    let z1 = Polynomial::var(2, 0);
    VectorField(vec![Polynomial::constant(2, subkoba::exact::Cq::real(subkoba::exact::q(1))), z1.mul(&z1)])
}

fn small() -> impl Strategy<Value = C64> {
    (-0.6f64..0.6, -0.6f64..0.6).prop_map(|(a, b)| c(a, b))
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cubic_flow_closed_form(a in small(), b in small(), t in small()) {
        let z = integrate_complex_flow(&cubic_field(), &[a, b], t, &StepConfig::default(), 100.0).unwrap();
        let want = [a + t, b + ((a + t).powi(3) - a.powi(3)) / 3.0];
        prop_assert!(max_dist(&z, &want) < 1e-8, "{:?} vs {:?}", z, want);
    }

    #[test]
    fn semigroup(a in small(), b in small(), s in small(), t in small()) {
        let x = cubic_field();
        let cfg = StepConfig::default();
        let one = integrate_complex_flow(&x, &[a, b], s + t, &cfg, 100.0).unwrap();
        let mid = integrate_complex_flow(&x, &[a, b], t, &cfg, 100.0).unwrap();
        let two = integrate_complex_flow(&x, &mid, s, &cfg, 100.0).unwrap();
        prop_assert!(max_dist(&one, &two) < 1e-8);
        let back = integrate_complex_flow(&x, &one, -(s + t), &cfg, 100.0).unwrap();
        prop_assert!(max_dist(&back, &[a, b]) < 1e-8);
    }

    #[test]
    fn heisenberg_connect_and_replay(x in proptest::collection::vec(small(), 3), y in proptest::collection::vec(small(), 3)) {
        let h = heisenberg(1.0);
        let w = chow_connect(&h, &x, &y, &ConnectConfig::default()).unwrap();
        prop_assert!(w.error < 1e-6);
        let a = replay(&h, &w, &StepConfig::default()).unwrap();
        let b = replay(&h, &w, &StepConfig::default()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &w.endpoint);
    }
}

#[test]
fn composition_order() {
    // The last stage acts first: φ_{X₁}(t) ∘ φ_{X₀}(s) moves z₁ before X₁ reads it.
    let h = heisenberg(1.0);
    let (s, t) = (c(0.3, 0.0), c(0.5, 0.0));
    let z = compose_flows(&h, &[FlowStage::frame(1, t), FlowStage::frame(0, s)], &[c(0.0, 0.0); 3], &StepConfig::default())
        .unwrap();
    assert!((z[2] - s * t).norm() < 1e-12);
    let z = compose_flows(&h, &[FlowStage::frame(0, s), FlowStage::frame(1, t)], &[c(0.0, 0.0); 3], &StepConfig::default())
        .unwrap();
    assert!(z[2].norm() < 1e-12);
}

#[test]
fn engel_chart_connects() {
    // Depth-3 frame: ∂₁, ∂₂ + z₁∂₃ + z₁²/2 ∂₄ on ℂ⁴.
    let n = 4;
    let one = Polynomial::constant(n, subkoba::exact::Cq::real(subkoba::exact::q(1)));
    let z1 = Polynomial::var(n, 0);
    let half = subkoba::exact::Cq::real(subkoba::exact::qr(1, 2));
    let x0 = VectorField(vec![one.clone(), Polynomial::zero(n), Polynomial::zero(n), Polynomial::zero(n)]);
    let x1 = VectorField(vec![Polynomial::zero(n), one, z1.clone(), z1.mul(&z1).scale(half)]);
    let cd = ChartDistribution::new("engel", vec![x0, x1], vec![vec![0, 1], vec![0, 0, 1]], 1.0, ChartDomain::Entire).unwrap();
    let y = [c(0.2, 0.1), c(-0.1, 0.0), c(0.05, -0.02), c(0.03, 0.01)];
    let w = chow_connect(&cd, &[c(0.0, 0.0); 4], &y, &ConnectConfig::default()).unwrap();
    assert!(w.error < 1e-8, "{}", w.error);
}
