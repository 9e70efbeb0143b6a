use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subkoba::chart::{ChartDistribution, C64};
use subkoba::curvature::{bisectional_curvature, certify_negative_bound, curvature_tensor, sectional_curvature, TangentFrame};
use subkoba::distances::{
    cc_distance_upper, infinitesimal_metric_upper, kobayashi_upper, schwarz_from_certificate, CcConfig,
    DistributionMetric, EstimateKind, KobayashiConfig, RhoKind,
};
use subkoba::exact::{q, qr, Cq, Q};
use subkoba::fixtures::{load_alg, load_chart, load_datum, FlagFixture};
use subkoba::flows::{chow_connect, compose_flows, jacobian_at_zero, replay, ConnectConfig, FlowStage, StepConfig};
use subkoba::grading::{check_bracket_generating, superhorizontal};
use subkoba::hyperbolicity::{
    check_forstneric_assumption, classify_homogeneous, compute_cn, Confidence, HomogeneousDatum, RejectReason, Verdict,
};
use subkoba::lie::build_for_type;
use subkoba::linalg::Subspace;
use subkoba::optim::SphereOptConfig;
use subkoba::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn flag(name: &str) -> FlagFixture {
    load_alg(&fixture(name)).unwrap()
}

fn chart(name: &str) -> ChartDistribution {
    load_chart(&fixture(name)).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn within(start: Instant, limit: Duration) {
    let t = start.elapsed();
    assert!(t < limit, "runtime {t:?} exceeds {limit:?}");
}

fn criterion_1() {
    let start = Instant::now();
    for ty in ["A1", "A2", "A3", "C2"] {
        let bd = build_for_type(ty.parse().unwrap());
        assert_eq!(bd.jacobi_violations(), 0, "{ty} Jacobi");
        assert_eq!(bd.killing_invariance_violations(), 0, "{ty} Killing invariance");
        let rep = bd.normalization_report();
        assert!(rep.all_hold(), "{ty} {rep:?}");
    }
    within(start, Duration::from_secs(5));
}

fn criterion_2() {
    let start = Instant::now();
    for name in ["su11.alg", "su21.alg", "su22.alg"] {
        let f = flag(name);
        let rf = &f.real_form;
        let dim = f.basis.dim();
        for slot in 0..dim {
            let e: Vec<Cq> = f.basis.unit(slot);
            let ie: Vec<Cq> = e.iter().map(|x| *x * Cq::i()).collect();
            for v in [e, ie] {
                assert_eq!(rf.sigma_apply(&rf.sigma_apply(&v)), v, "{name} σ²");
                assert_eq!(rf.theta_apply(&rf.theta_apply(&v)), v, "{name} θ²");
                assert_eq!(rf.sigma_apply(&rf.theta_apply(&v)), rf.theta_apply(&rf.sigma_apply(&v)), "{name} σθ");
            }
        }
        assert_eq!(rf.killing_definiteness(&rf.k_basis).unwrap(), -1, "{name} B on k");
        assert_eq!(rf.killing_definiteness(&rf.q_basis).unwrap(), 1, "{name} B on q");
    }
    within(start, Duration::from_secs(5));
}

fn criterion_3() {
    let start = Instant::now();
    let f = flag("su21.alg");
    let dims: Vec<usize> = f.grading.dims().into_iter().map(|d| d.1).collect();
    assert_eq!(dims, vec![1, 2, 2, 2, 1]);
    assert_eq!(f.grading.depth(), 2);
    let gen = check_bracket_generating(&superhorizontal(&f.grading), &f.grading).unwrap();
    assert_eq!(gen.depth(), Some(2));
    let f = flag("su11.alg");
    assert_eq!(f.grading.depth(), 1);
    within(start, Duration::from_secs(1));
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> Cq {
    loop {
        let z = Cq::new(qr(rng.gen_range(-6..=6), rng.gen_range(1..=5)), qr(rng.gen_range(-6..=6), rng.gen_range(1..=5)));
        if z != Cq::default() {
            return z;
        }
    }
}

fn random_in(rng: &mut ChaCha8Rng, basis: &[Vec<Cq>]) -> Vec<Cq> {
    let coeffs: Vec<Cq> = basis.iter().map(|_| random_gaussian(rng)).collect();
    (0..basis[0].len()).map(|s| coeffs.iter().zip(basis).fold(Cq::default(), |acc, (k, v)| acc + *k * v[s])).collect()
}

fn criterion_4() {
    let f = flag("su11.alg");
    let neg = f.basis.unit::<Cq>(f.basis.roots.negative_of(0));
    assert_eq!(sectional_curvature(&f.real_form, &f.grading, &neg).unwrap(), qr(-1, 2));
    let cert = certify_negative_bound(&f.real_form, &f.grading, &SphereOptConfig::default()).unwrap();
    assert!((cert.c - 0.5).abs() <= 1e-10, "c = {}", cert.c);

    let f = flag("su21.alg");
    let tensor = curvature_tensor(&f.real_form, &f.grading, TangentFrame::Superhorizontal).unwrap();
    let u = f.grading.level(-1).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let z = random_in(&mut rng, &u);
        let x = random_in(&mut rng, &u);
        let a: Q = bisectional_curvature(&f.real_form, &f.grading, &z, &x).unwrap();
        let b: Q = tensor.bisectional(&f.real_form, &z, &x).unwrap();
        assert_eq!(a, b);
    }
}

fn criterion_5() {
    let cfg = SphereOptConfig { restarts: 32, ..Default::default() };
    for name in ["su21.alg", "su22.alg"] {
        let start = Instant::now();
        let f = flag(name);
        let cert = certify_negative_bound(&f.real_form, &f.grading, &cfg).unwrap();
        assert!(cert.c > 0.0, "{name} c = {}", cert.c);
        assert!(cert.spread < 1e-8, "{name} spread {}", cert.spread);
        assert_eq!(cert.restarts, 32);
        within(start, Duration::from_secs(60));
    }
    let start = Instant::now();
    let f = flag("su2_compact.alg");
    let r = certify_negative_bound(&f.real_form, &f.grading, &cfg);
    assert!(matches!(r, Err(Error::NotNegative { .. })), "{r:?}");
    within(start, Duration::from_secs(60));
}

fn criterion_6() {
    let h = chart("heisenberg.chart");
    let step = StepConfig::default();
    let zero = [c(0.0, 0.0); 3];
    for t in [0.1, 0.5] {
        let t = c(t, 0.0);
        let stages = vec![
            FlowStage::frame(0, t),
            FlowStage::frame(1, t),
            FlowStage::frame(0, -t),
            FlowStage::frame(1, -t),
        ];
        let z = compose_flows(&h, &stages, &zero, &step).unwrap();
        let want = [c(0.0, 0.0), c(0.0, 0.0), -t * t];
        for (a, b) in z.iter().zip(&want) {
            assert!((a - b).norm() < 1e-8, "{z:?}");
        }
    }
    let jac = jacobian_at_zero(&h, &zero, &step).unwrap();
    for (i, row) in jac.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((v - id).norm() < 1e-6, "dF[{i}][{j}] = {v}");
        }
    }
    let target = [c(0.3, -0.2), c(-0.1, 0.4), c(0.25, 0.1)];
    let word = chow_connect(&h, &zero, &target, &ConnectConfig::default()).unwrap();
    let a = replay(&h, &word, &step).unwrap();
    let b = replay(&h, &word, &step).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    assert!(a.iter().zip(&word.endpoint).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
}

fn criterion_7() {
    let start = Instant::now();
    let h = chart("heisenberg.chart");
    let r = h.box_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let zero = [c(0.0, 0.0); 3];
    let cfg = ConnectConfig::default();
    for k in 0..100 {
        let y: Vec<C64> = (0..3).map(|_| c(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect();
        let w = chow_connect(&h, &zero, &y, &cfg).unwrap_or_else(|e| panic!("target {k} {y:?}: {e}"));
        assert!(w.error < 1e-6, "target {k} error {}", w.error);
        let dist = w.endpoint.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dist < 1e-6);
    }
    within(start, Duration::from_secs(30));
}

fn criterion_8() {
    let cfg = KobayashiConfig::default();
    let delta = chart("disc.chart");
    let est = kobayashi_upper(&delta, &[c(0.0, 0.0)], &[c(0.5, 0.0)], &cfg).unwrap();
    assert_eq!(est.kind, EstimateKind::Upper);
    let v = est.value.unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-3, "d = {v}");
    let k = infinitesimal_metric_upper(&delta, &[c(0.0, 0.0)], &[c(1.0, 0.0)], &cfg).unwrap();
    assert!((k.value - 2.0).abs() < 1e-3, "k = {}", k.value);

    let h = chart("heisenberg.chart");
    assert_eq!(1.0 / cfg.min_radius, 1e3);
    let est = kobayashi_upper(&h, &[c(0.0, 0.0); 3], &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], &cfg).unwrap();
    let v = est.value.unwrap();
    assert!(v < 0.01, "d = {v}");
}

fn criterion_9() {
    let f = flag("su11.alg");
    let cert = certify_negative_bound(&f.real_form, &f.grading, &SphereOptConfig::default()).unwrap();
    let rho = 2f64.sqrt() * 3f64.ln();
    let bound = schwarz_from_certificate(&cert, rho, RhoKind::Exact).unwrap();
    assert_eq!(bound.kind, EstimateKind::Lower);
    let delta = chart("disc.chart");
    let est = kobayashi_upper(&delta, &[c(0.0, 0.0)], &[c(0.5, 0.0)], &KobayashiConfig::default()).unwrap();
    let d = est.value.unwrap();
    assert!((bound.value - d).abs() < 1e-6, "bound {} vs d {d}", bound.value);
}

fn criterion_10() {
    let h = chart("heisenberg.chart");
    let m = DistributionMetric::FrameOrthonormal;
    let cfg = CcConfig::default();
    let zero = [c(0.0, 0.0); 3];
    let dist = |s: f64| {
        let est = cc_distance_upper(&h, &m, &zero, &[c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], &cfg).unwrap();
        assert!(est.residuals.endpoint < 1e-6, "endpoint residual {}", est.residuals.endpoint);
        est.value.unwrap()
    };
    let base = dist(1.0);
    for lambda in [0.5, 2.0] {
        let ratio = dist(lambda * lambda) / base;
        assert!((ratio / lambda - 1.0).abs() <= 0.05, "λ = {lambda}: ratio {ratio}");
    }
}

fn act(m: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    m.iter().map(|r| r.iter().zip(x).fold(q(0), |a, (p, y)| a + p * y)).collect()
}

fn real_witness(hd: &HomogeneousDatum, verdict: &Verdict) -> (RejectReason, Option<Vec<Q>>) {
    let Verdict::Rejected { reason, witness } = verdict else { panic!("{} not rejected", hd.name) };
    let v = witness.vector.as_ref().map(|v| {
        assert!(v.iter().all(|z| z.im == q(0)));
        v.iter().map(|z| z.re).collect()
    });
    (*reason, v)
}

fn criterion_11() {
    let start = Instant::now();
    for name in ["su21.alg", "su22.alg"] {
        let hd = flag(name).datum().unwrap();
        let rep = classify_homogeneous(&hd);
        assert!(matches!(rep.verdict, Verdict::CanonicalSuperhorizontal), "{name}: {:?}", rep.verdict);
    }

    let hd = flag("su2_compact.alg").datum().unwrap();
    let (reason, w) = real_witness(&hd, &classify_homogeneous(&hd).verdict);
    assert_eq!(reason, RejectReason::CompactFactor);
    let w = w.expect("compact factor witness");
    // A nonzero element of a compact ideal: B(w, w) < 0.
    let k = hd.algebra.killing_matrix();
    assert!(w.iter().any(|x| *x != q(0)));
    assert_eq!(act(hd.theta.as_ref().unwrap(), &w), w);
    assert!(act(&k, &w).iter().zip(&w).fold(q(0), |a, (p, y)| a + p * y) < q(0));

    let hd = load_datum(&fixture("sl2c_real.datum")).unwrap().datum().unwrap();
    let rep = classify_homogeneous(&hd);
    let Verdict::Rejected { reason, witness } = &rep.verdict else { panic!("{:?}", rep.verdict) };
    assert_eq!(*reason, RejectReason::ComplexLieAlgebra);
    // The witness is a centroid element A with tr(A²) < 0.
    let a = witness.matrix.clone().expect("centroid witness");
    let a: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|s| s.0).collect()).collect();
    let n = hd.dim();
    let tr = (0..n).fold(q(0), |acc, i| acc + (0..n).fold(q(0), |t, k| t + a[i][k] * a[k][i]));
    assert!(tr < q(0));
    let unit = |i: usize| -> Vec<Q> { (0..n).map(|k| if k == i { q(1) } else { q(0) }).collect() };
    for x in 0..n {
        for y in 0..n {
            let (ex, ey) = (unit(x), unit(y));
            assert_eq!(act(&a, &hd.algebra.bracket(&ex, &ey)), hd.algebra.bracket(&ex, &act(&a, &ey)));
        }
    }

    let hd = flag("k1_hand.alg").datum().unwrap();
    let (reason, w) = real_witness(&hd, &classify_homogeneous(&hd).verdict);
    assert_eq!(reason, RejectReason::CompactHorizontal);
    let w = w.expect("k1 witness");
    let theta = hd.theta.as_ref().unwrap();
    assert!(w.iter().any(|x| *x != q(0)));
    assert_eq!(act(theta, &w), w);
    assert!(Subspace::span(hd.dim(), &hd.g1r).contains(&w));
    within(start, Duration::from_secs(30));
}

fn criterion_12() {
    let h = chart("heisenberg.chart");
    let rep = check_forstneric_assumption(&h, 5);
    assert_eq!(rep.confidence, Confidence::Proven);
    let cn = compute_cn(&h, 1).unwrap();
    // 2 + 2·4·sup|coefficients| with sup = 2 on the torus of radius 2.
    assert_eq!(cn.formula, 18.0);
    assert!(cn.c_n >= 18.0 && cn.c_n <= 18.0 * cn.safety + 1e-9, "{cn:?}");
}

fn main() {
    let criteria: [(&str, fn()); 12] = [
        ("exact algebra suite", criterion_1),
        ("real-form suite", criterion_2),
        ("grading", criterion_3),
        ("curvature anchor", criterion_4),
        ("negativity certification", criterion_5),
        ("flows", criterion_6),
        ("Chow connectivity", criterion_7),
        ("Kobayashi calibration", criterion_8),
        ("Schwarz tightness", criterion_9),
        ("CC dilation law", criterion_10),
        ("classification verdicts", criterion_11),
        ("Forstneric constants", criterion_12),
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(run)).is_ok();
        if !ok {
            failed += 1;
        }
        println!("{} {:>2} {name} ({:.2?})", if ok { "PASS" } else { "FAIL" }, i + 1, start.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
