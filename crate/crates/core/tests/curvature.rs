use std::sync::OnceLock;

use proptest::prelude::*;

use subkoba::curvature::{bisectional_curvature, certify_negative_bound, curvature_tensor, sectional_curvature, TangentFrame};
use subkoba::exact::{q, q_to_f64, qr, Cq};
use subkoba::fixtures::{parse_alg, FlagFixture};
use subkoba::optim::SphereOptConfig;

fn su21() -> &'static FlagFixture {
    static F: OnceLock<FlagFixture> = OnceLock::new();
    F.get_or_init(|| parse_alg("cartan_type = \"A2\"\nepsilon_simple = [1, 1]\n").unwrap())
}

fn su22() -> &'static FlagFixture {
    static F: OnceLock<FlagFixture> = OnceLock::new();
    F.get_or_init(|| parse_alg("cartan_type = \"A3\"\nepsilon_simple = [1, 1, 1]\n").unwrap())
}

fn gaussian() -> impl Strategy<Value = Cq> {
    ((-7i128..=7, 1i128..=4), (-7i128..=7, 1i128..=4)).prop_map(|((a, b), (c, d))| Cq::new(qr(a, b), qr(c, d)))
}

fn nonzero_gaussian() -> impl Strategy<Value = Cq> {
    gaussian().prop_filter("nonzero", |z| *z != Cq::default())
}

fn combine(f: &FlagFixture, coeffs: &[Cq]) -> Vec<Cq> {
    let u = f.grading.level(-1);
    (0..f.basis.dim()).map(|s| coeffs.iter().zip(u).fold(Cq::default(), |acc, (k, v)| acc + *k * v[s])).collect()
}

fn direction(m: usize) -> impl Strategy<Value = Vec<Cq>> {
    proptest::collection::vec(gaussian(), m).prop_filter("nonzero", |v| v.iter().any(|z| *z != Cq::default()))
}

fn pick(which: bool) -> &'static FlagFixture {
    if which {
        su22()
    } else {
        su21()
    }
}

fn case() -> impl Strategy<Value = (bool, Vec<Cq>, Vec<Cq>)> {
    any::<bool>().prop_flat_map(|which| {
        let m = pick(which).grading.level(-1).len();
        (Just(which), direction(m), direction(m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sectional_is_scale_invariant((which, a, _b) in case(), lambda in nonzero_gaussian()) {
        let f = pick(which);
        let z = combine(f, &a);
        let scaled: Vec<Cq> = z.iter().map(|c| *c * lambda).collect();
        let h = sectional_curvature(&f.real_form, &f.grading, &z).unwrap();
        prop_assert_eq!(h, sectional_curvature(&f.real_form, &f.grading, &scaled).unwrap());
    }

    #[test]
    fn sectional_is_negative((which, a, _b) in case()) {
        let f = pick(which);
        let h = sectional_curvature(&f.real_form, &f.grading, &combine(f, &a)).unwrap();
        prop_assert!(h < q(0));
    }

    #[test]
    fn dual_routes_agree((which, a, b) in case()) {
        let f = pick(which);
        let tensor = curvature_tensor(&f.real_form, &f.grading, TangentFrame::Superhorizontal).unwrap();
        let (z, x) = (combine(f, &a), combine(f, &b));
        let direct = bisectional_curvature(&f.real_form, &f.grading, &z, &x).unwrap();
        prop_assert_eq!(direct, tensor.bisectional(&f.real_form, &z, &x).unwrap());
        prop_assert_eq!(direct, bisectional_curvature(&f.real_form, &f.grading, &x, &z).unwrap());
    }
}

#[test]
fn certificate_bounds_every_sample() {
    let cfg = SphereOptConfig { restarts: 8, ..Default::default() };
    for f in [su21(), su22()] {
        let cert = certify_negative_bound(&f.real_form, &f.grading, &cfg).unwrap();
        let m = f.grading.level(-1).len();
        for k in 0..50i128 {
            let coeffs: Vec<Cq> =
                (0..m as i128).map(|j| Cq::new(qr((k * 7 + j * 3) % 11 - 5, 3), qr((k * 5 + j) % 7 - 3, 2))).collect();
            if coeffs.iter().all(|c| *c == Cq::default()) {
                continue;
            }
            let h = q_to_f64(&sectional_curvature(&f.real_form, &f.grading, &combine(f, &coeffs)).unwrap());
            assert!(h <= -cert.c + 1e-9, "H = {h}, c = {}", cert.c);
        }
    }
}
