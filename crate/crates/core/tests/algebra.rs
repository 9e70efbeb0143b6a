use proptest::prelude::*;

use subkoba::exact::{q, qr, Q};
use subkoba::fixtures::{parse_alg, parse_chart};
use subkoba::lie::{build_for_type, BasisData};
use subkoba::Error;

fn rational() -> impl Strategy<Value = Q> {
    (-9i128..=9, 1i128..=4).prop_map(|(n, d)| qr(n, d))
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(rational(), dim)
}

fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn trace_form(bd: &BasisData, x: &[Q], y: &[Q]) -> Q {
    let (ax, ay) = (bd.ad_matrix::<Q>(x), bd.ad_matrix::<Q>(y));
    let n = ax.len();
    (0..n).fold(q(0), |acc, i| acc + (0..n).fold(q(0), |s, k| s + ax[i][k] * ay[k][i]))
}

fn triple(ty: &'static str) -> impl Strategy<Value = (&'static str, Vec<Q>, Vec<Q>, Vec<Q>)> {
    let dim = build_for_type(ty.parse().unwrap()).dim();
    (vector(dim), vector(dim), vector(dim)).prop_map(move |(x, y, z)| (ty, x, y, z))
}

fn any_triple() -> impl Strategy<Value = (&'static str, Vec<Q>, Vec<Q>, Vec<Q>)> {
    prop_oneof![triple("A1"), triple("A2"), triple("B2"), triple("C2"), triple("A3"), triple("B3"), triple("D4")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_identity((ty, x, y, z) in any_triple()) {
        let bd = build_for_type(ty.parse().unwrap());
        let a = bd.bracket(&x, &bd.bracket(&y, &z));
        let b = bd.bracket(&y, &bd.bracket(&z, &x));
        let c = bd.bracket(&z, &bd.bracket(&x, &y));
        prop_assert!(add(&add(&a, &b), &c).iter().all(|v| *v == q(0)));
        let yx = bd.bracket(&y, &x);
        prop_assert_eq!(add(&bd.bracket(&x, &y), &yx), vec![q(0); bd.dim()]);
    }

    #[test]
    fn killing_invariance((ty, x, y, z) in any_triple()) {
        let bd = build_for_type(ty.parse().unwrap());
        prop_assert_eq!(bd.killing_form(&bd.bracket(&x, &y), &z), bd.killing_form(&x, &bd.bracket(&y, &z)));
        prop_assert_eq!(bd.killing_form(&x, &y), bd.killing_form(&y, &x));
    }

    #[test]
    fn killing_is_trace_of_ad((ty, x, y, _z) in any_triple()) {
        let bd = build_for_type(ty.parse().unwrap());
        prop_assert_eq!(bd.killing_form(&x, &y), trace_form(&bd, &x, &y));
    }
}

#[test]
fn normalization_across_types() {
    for ty in ["A1", "A2", "A3", "A4", "B2", "B3", "C2", "C3", "D4"] {
        let bd = build_for_type(ty.parse().unwrap());
        assert_eq!(bd.jacobi_violations(), 0, "{ty}");
        assert!(bd.normalization_report().all_hold(), "{ty}");
    }
}

#[test]
fn fixture_errors() {
    let e = parse_alg("cartan_type = \"E6\"\nepsilon_simple = []\n").err().unwrap();
    assert!(matches!(e, Error::UnsupportedType(_)), "{e:?}");
    let e = parse_alg("cartan_type = \"A2\"\n").err().unwrap();
    assert!(matches!(e, Error::Fixture(ref m) if m.contains("epsilon_simple")), "{e:?}");
    let e = parse_alg("cartan_type = \"A2\"\nepsilon_simple = [1]\n").err().unwrap();
    assert!(!matches!(e, Error::Fixture(_)), "{e:?}");
    let e = parse_chart("dim = 1\nbox_radius = 1.0\nframe = []\ncolour = 1\n").err().unwrap();
    assert!(matches!(e, Error::Fixture(ref m) if m.contains("colour")), "{e:?}");
}
