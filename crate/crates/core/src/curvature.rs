//! Invariant Hermitian metric on `g_{-1}`, holomorphic (bi)sectional
//! curvature, the curvature tensor, and certified negative upper bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, Cq, QStr, Q};
use crate::grading::GradedDecomposition;
use crate::lie::RealFormData;
use crate::linalg::{definiteness, Matrix, Subspace};
use crate::optim::{maximize_on_sphere, SphereOptConfig};

fn check_compatible(rf: &RealFormData, gd: &GradedDecomposition) -> Result<()> {
    if rf.basis.algebra != *gd.algebra {
        return Err(Error::DomainError("grading and real form live on different algebras".into()));
    }
    Ok(())
}

fn in_level(gd: &GradedDecomposition, l: i64, v: &[Cq]) -> Result<()> {
    if v.len() != gd.algebra.dim() || !gd.level_space(l).contains(v) {
        return Err(Error::DomainError(format!("vector is not in g_{l}")));
    }
    Ok(())
}

fn real_part(z: Cq, what: &str) -> Result<Q> {
    if z.is_real() {
        Ok(z.re)
    } else {
        Err(Error::DomainError(format!("{what} is not real: {z:?}")))
    }
}

/// `g(ζ, ξ) = B(ζ, σ(ξ))` for `ζ, ξ ∈ g_{-1}`.
pub fn invariant_metric(rf: &RealFormData, gd: &GradedDecomposition, zeta: &[Cq], xi: &[Cq]) -> Result<Cq> {
    check_compatible(rf, gd)?;
    in_level(gd, -1, zeta)?;
    in_level(gd, -1, xi)?;
    Ok(rf.basis.killing_form(zeta, &rf.sigma_apply(xi)))
}

/// `[ζ, σ(ζ)]`.
pub fn twisted_square(rf: &RealFormData, zeta: &[Cq]) -> Vec<Cq> {
    rf.basis.bracket(zeta, &rf.sigma_apply(zeta))
}

/// Exact test of `x ∈ √-1·v`, i.e. `x ∈ g_0` and `σ(x) = -x`.
pub fn in_imaginary_isotropy(rf: &RealFormData, gd: &GradedDecomposition, x: &[Cq]) -> bool {
    let neg: Vec<Cq> = x.iter().map(|c| -*c).collect();
    gd.level_space(0).contains(x) && rf.sigma_apply(x) == neg
}

/// `-B([ζ,σζ],[ξ,σξ]) / (g(ζ,ζ) g(ξ,ξ))`.
pub fn bisectional_curvature(rf: &RealFormData, gd: &GradedDecomposition, zeta: &[Cq], xi: &[Cq]) -> Result<Q> {
    let gz = real_part(invariant_metric(rf, gd, zeta, zeta)?, "g(ζ,ζ)")?;
    let gx = real_part(invariant_metric(rf, gd, xi, xi)?, "g(ξ,ξ)")?;
    if gz == q(0) || gx == q(0) {
        return Err(Error::DomainError("zero direction".into()));
    }
    let num = rf.basis.killing_form(&twisted_square(rf, zeta), &twisted_square(rf, xi));
    Ok(-real_part(num, "B([ζ,σζ],[ξ,σξ])")? / (gz * gx))
}

/// `H(ζ) = Bisec(ζ, ζ)`.
pub fn sectional_curvature(rf: &RealFormData, gd: &GradedDecomposition, zeta: &[Cq]) -> Result<Q> {
    bisectional_curvature(rf, gd, zeta, zeta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentFrame {
    /// Root vectors of `g_{-1}`.
    Superhorizontal,
    /// Root vectors of all of `g⁻`.
    Full,
}

/// `Θ = Σ R_{αβ} ω^α ∧ ω̄^β` with `R_{αβ} = ∓ad_{[e_α, e_{-β}]_v}`: minus for
/// noncompact pairs, plus for compact pairs outside `v`.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    pub frame: TangentFrame,
    /// Positive roots `α` with `e_{-α}` in the frame.
    pub roots: Vec<usize>,
    /// `components[a][b]` is the element `X` with `R_{αβ} = ad_X`.
    pub components: Vec<Vec<Vec<Q>>>,
}

pub fn curvature_tensor(rf: &RealFormData, gd: &GradedDecomposition, frame: TangentFrame) -> Result<CurvatureTensor> {
    check_compatible(rf, gd)?;
    let levels = gd
        .root_levels
        .as_ref()
        .ok_or_else(|| Error::DomainError("curvature tensor needs a root-basis grading".into()))?;
    let bd = &rf.basis;
    let roots: Vec<usize> = bd
        .roots
        .positive_indices()
        .filter(|&a| match frame {
            TangentFrame::Superhorizontal => levels[a] == 1,
            TangentFrame::Full => levels[a] > 0,
        })
        .collect();
    let components = roots
        .iter()
        .map(|&a| {
            roots
                .iter()
                .map(|&b| {
                    let (ca, cb) = (rf.eps.is_compact(a), rf.eps.is_compact(b));
                    // Projection to v: the bracket lies in a single level.
                    if ca != cb || levels[a] != levels[b] {
                        return vec![q(0); bd.dim()];
                    }
                    let x = bd.bracket(&bd.unit::<Q>(a), &bd.unit::<Q>(bd.roots.negative_of(b)));
                    let sign = if ca { q(1) } else { q(-1) };
                    x.into_iter().map(|v| v * sign).collect()
                })
                .collect()
        })
        .collect();
    Ok(CurvatureTensor { frame, roots, components })
}

impl CurvatureTensor {
    fn check_in_frame(&self, rf: &RealFormData, v: &[Cq]) -> Result<()> {
        let bd = &rf.basis;
        let vs: Vec<Vec<Cq>> =
            self.roots.iter().map(|&a| bd.unit::<Cq>(bd.roots.negative_of(a))).collect();
        if !Subspace::span(bd.dim(), &vs).contains(v) {
            return Err(Error::DomainError("vector outside the tensor frame".into()));
        }
        Ok(())
    }

    /// The element `X` with `Θ(ζ, ζ̄) = ad_X`, contracting through the
    /// components of `σζ` along `e_α`.
    pub fn contract(&self, rf: &RealFormData, zeta: &[Cq]) -> Result<Vec<Cq>> {
        self.check_in_frame(rf, zeta)?;
        let s = rf.sigma_apply(zeta);
        let coeff: Vec<Cq> = self.roots.iter().map(|&a| s[rf.basis.root_slot(a)]).collect();
        let mut x = vec![Cq::default(); rf.basis.dim()];
        for (ia, ca) in coeff.iter().enumerate() {
            for (ib, cb) in coeff.iter().enumerate() {
                let w = *ca * cb.conj();
                if w == Cq::default() {
                    continue;
                }
                for (xk, rk) in x.iter_mut().zip(&self.components[ia][ib]) {
                    if *rk != q(0) {
                        *xk -= w.scale(*rk);
                    }
                }
            }
        }
        Ok(x)
    }

    /// `h(Θ(ζ,ζ̄)ξ, ξ) / (h(ζ,ζ) h(ξ,ξ))` with the positive form
    /// `h(x, y) = -B(x, σ_u y)`.
    pub fn bisectional(&self, rf: &RealFormData, zeta: &[Cq], xi: &[Cq]) -> Result<Q> {
        self.check_in_frame(rf, xi)?;
        let x = self.contract(rf, zeta)?;
        let bd = &rf.basis;
        let h = |a: &[Cq], b: &[Cq]| -bd.killing_form(a, &rf.compact_apply(b));
        let hz = real_part(h(zeta, zeta), "h(ζ,ζ)")?;
        let hx = real_part(h(xi, xi), "h(ξ,ξ)")?;
        if hz == q(0) || hx == q(0) {
            return Err(Error::DomainError("zero direction".into()));
        }
        let num = real_part(h(&bd.bracket(&x, xi), xi), "h(Θξ,ξ)")?;
        Ok(num / (hz * hx))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSample {
    /// Coordinates over the root vectors of `g_{-1}`.
    pub point: Vec<Cq>,
    pub value: QStr,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureCertificate {
    pub c: f64,
    /// Unit (for `g`) maximizer over the root vectors of `g_{-1}`, as `[re, im]`.
    pub argmax: Vec<[f64; 2]>,
    pub restarts: usize,
    pub iterations: usize,
    pub best_value: f64,
    /// Spread of the per-restart optima.
    pub spread: f64,
    pub tol: f64,
    pub seed: u64,
    pub frame: TangentFrame,
    pub exact_sample: ExactSample,
}

/// Numerical model of `H` on `g_{-1}` in orthonormal real coordinates.
struct SphereModel {
    m: usize,
    /// `c = x_a + i x_{m+a}` with `x = to_coords · y`.
    to_coords: Matrix<f64>,
    /// `K[ab][cd] = B([u_a,σu_b], [u_c,σu_d])`.
    k: Vec<Vec<num_complex::Complex64>>,
}

impl SphereModel {
    fn coords(&self, y: &[f64]) -> Vec<num_complex::Complex64> {
        let x: Vec<f64> = self.to_coords.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        (0..self.m).map(|a| num_complex::Complex64::new(x[a], x[self.m + a])).collect()
    }

    /// `Q(c) = B([ζ,σζ],[ζ,σζ])` and its gradient in `y`.
    fn value_grad(&self, y: &[f64]) -> (f64, Vec<f64>) {
        use num_complex::Complex64 as C;
        let m = self.m;
        let c = self.coords(y);
        let w: Vec<C> = (0..m * m).map(|ab| c[ab / m] * c[ab % m].conj()).collect();
        let beta: Vec<C> =
            (0..m * m).map(|ab| (0..m * m).map(|cd| w[cd] * self.k[cd][ab]).sum()).collect();
        let value: C = (0..m * m).map(|ab| w[ab] * beta[ab]).sum();
        let mut gx = vec![0.0; 2 * m];
        for a in 0..m {
            let p: C = (0..m).map(|b| c[b].conj() * beta[a * m + b]).sum::<C>() * 2.0;
            let qd: C = (0..m).map(|b| c[b] * beta[b * m + a]).sum::<C>() * 2.0;
            gx[a] = (p + qd).re;
            gx[m + a] = -p.im + qd.im;
        }
        // Chain rule through x = to_coords · y.
        let gy = (0..2 * m).map(|j| (0..2 * m).map(|i| self.to_coords[i][j] * gx[i]).sum()).collect();
        (value.re, gy)
    }
}

fn cholesky(a: &Matrix<f64>) -> Option<Matrix<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix, transposed.
fn inv_lower_t(l: &Matrix<f64>) -> Matrix<f64> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        for i in 0..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - s) / l[i][i];
        }
    }
    (0..n).map(|i| (0..n).map(|j| inv[j][i]).collect()).collect()
}

/// Maximize `H` over the `g`-unit sphere of `g_{-1}`; `c = -max`.
pub fn certify_negative_bound(
    rf: &RealFormData,
    gd: &GradedDecomposition,
    cfg: &SphereOptConfig,
) -> Result<CurvatureCertificate> {
    check_compatible(rf, gd)?;
    let bd = &rf.basis;
    let u = gd.level(-1).to_vec();
    let m = u.len();
    if m == 0 {
        return Err(Error::DomainError("g_-1 is zero".into()));
    }
    // Real Gram matrix of Re g on the real basis {u_a, i·u_a}.
    let real_basis: Vec<Vec<Cq>> = u
        .iter()
        .cloned()
        .chain(u.iter().map(|v| v.iter().map(|c| *c * Cq::i()).collect()))
        .collect();
    let gram: Matrix<Q> = real_basis
        .iter()
        .map(|a| real_basis.iter().map(|b| bd.killing_form(a, &rf.sigma_apply(b)).re).collect())
        .collect();
    if definiteness(&gram) != 1 {
        let (idx, val) = (0..2 * m)
            .map(|i| (i, gram[i][i]))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("nonempty");
        let mut witness = vec![0.0; 2 * m];
        witness[idx] = 1.0;
        return Err(Error::NotNegative {
            reason: "invariant metric is not positive definite on g_-1".into(),
            value: q_to_f64(&val),
            witness,
        });
    }
    let gram_f: Matrix<f64> = gram.iter().map(|r| r.iter().map(q_to_f64).collect()).collect();
    let l = cholesky(&gram_f).ok_or_else(|| Error::DomainError("metric Gram matrix is ill-conditioned".into()))?;
    let to_coords = inv_lower_t(&l);

    let w: Vec<Vec<Cq>> =
        (0..m * m).map(|ab| bd.bracket(&u[ab / m], &rf.sigma_apply(&u[ab % m]))).collect();
    let k = (0..m * m)
        .map(|ab| (0..m * m).map(|cd| bd.killing_form(&w[ab], &w[cd]).to_c64()).collect())
        .collect();
    let model = SphereModel { m, to_coords, k };
    let f = |y: &[f64]| {
        let (v, g) = model.value_grad(y);
        (-v, g.into_iter().map(|x| -x).collect())
    };
    let res = maximize_on_sphere(2 * m, f, cfg);
    let best = &res.best;
    let coords = model.coords(&best.point);

    // Exact anchor: round to denominator 2^16 and evaluate H exactly.
    let bits = 16;
    let scale = (1i64 << bits) as f64;
    let gauss: Vec<Cq> =
        coords.iter().map(|z| Cq::new(q((z.re * scale).round() as i128), q((z.im * scale).round() as i128))).collect();
    let zeta: Vec<Cq> = (0..bd.dim())
        .map(|slot| gauss.iter().zip(&u).fold(Cq::default(), |acc, (c, v)| acc + *c * v[slot]))
        .collect();
    let exact = sectional_curvature(rf, gd, &zeta)?;
    let den = q(1i128 << bits);
    let point = gauss.iter().map(|z| Cq::new(z.re / den, z.im / den)).collect();

    if best.value >= -cfg.tol {
        return Err(Error::NotNegative {
            reason: "holomorphic sectional curvature is not bounded away from zero".into(),
            value: best.value,
            witness: best.point.clone(),
        });
    }
    Ok(CurvatureCertificate {
        c: -best.value,
        argmax: coords.iter().map(|z| [z.re, z.im]).collect(),
        restarts: cfg.restarts,
        iterations: res.total_iterations,
        best_value: best.value,
        spread: res.spread,
        tol: cfg.tol,
        seed: cfg.seed,
        frame: TangentFrame::Superhorizontal,
        exact_sample: ExactSample { point, value: QStr(exact) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;
    use crate::grading::{grade, grading_element};
    use crate::lie::{apply_real_form, build_for_type, EpsilonLabels};
    use std::sync::Arc;

    fn flag(ty: &str, simple: &[i8]) -> (RealFormData, GradedDecomposition) {
        let bd = Arc::new(build_for_type(ty.parse().unwrap()));
        let eps = EpsilonLabels::from_simple(&bd.roots, simple).unwrap();
        let rf = apply_real_form(&bd, &eps).unwrap();
        let gd = grade(&bd, &grading_element(&bd.roots, &[]).unwrap()).unwrap();
        (rf, gd)
    }

    fn neg_root(rf: &RealFormData, a: usize) -> Vec<Cq> {
        rf.basis.unit(rf.basis.roots.negative_of(a))
    }

    #[test]
    fn su11_values() {
        let (rf, gd) = flag("A1", &[1]);
        let z = neg_root(&rf, 0);
        assert_eq!(invariant_metric(&rf, &gd, &z, &z).unwrap(), Cq::real(q(1)));
        assert_eq!(sectional_curvature(&rf, &gd, &z).unwrap(), qr(-1, 2));
        let t = curvature_tensor(&rf, &gd, TangentFrame::Superhorizontal).unwrap();
        assert_eq!(t.bisectional(&rf, &z, &z).unwrap(), qr(-1, 2));
    }

    #[test]
    fn su21_values() {
        let (rf, gd) = flag("A2", &[1, 1]);
        let (z1, z2) = (neg_root(&rf, 0), neg_root(&rf, 1));
        assert_eq!(invariant_metric(&rf, &gd, &z1, &z2).unwrap(), Cq::default());
        assert_eq!(sectional_curvature(&rf, &gd, &z1).unwrap(), qr(-1, 3));
        assert_eq!(bisectional_curvature(&rf, &gd, &z1, &z2).unwrap(), qr(1, 6));
        assert!(in_imaginary_isotropy(&rf, &gd, &twisted_square(&rf, &z1)));
    }

    #[test]
    fn outside_g_minus_one_rejected() {
        let (rf, gd) = flag("A2", &[1, 1]);
        let top = neg_root(&rf, 2);
        assert!(matches!(sectional_curvature(&rf, &gd, &top), Err(Error::DomainError(_))));
        let zero = vec![Cq::default(); rf.basis.dim()];
        assert!(sectional_curvature(&rf, &gd, &zero).is_err());
    }

    #[test]
    fn compact_direction_flips_sign() {
        let (rf, gd) = flag("A2", &[1, 1]);
        let t = curvature_tensor(&rf, &gd, TangentFrame::Full).unwrap();
        let top = neg_root(&rf, 2);
        let z1 = neg_root(&rf, 0);
        assert!(t.bisectional(&rf, &top, &top).unwrap() > q(0));
        assert!(t.bisectional(&rf, &z1, &z1).unwrap() < q(0));
    }

    #[test]
    fn certificates() {
        let cfg = SphereOptConfig::default();
        let (rf, gd) = flag("A1", &[1]);
        let c = certify_negative_bound(&rf, &gd, &cfg).unwrap();
        assert!((c.c - 0.5).abs() < 1e-10);
        let (rf, gd) = flag("A2", &[1, 1]);
        let c = certify_negative_bound(&rf, &gd, &cfg).unwrap();
        assert!((c.c - 1.0 / 12.0).abs() < 1e-9, "{}", c.c);
        assert!(c.spread < 1e-8);
        assert!((q_to_f64(&c.exact_sample.value.0) + c.c).abs() < 1e-6);
        let (rf, gd) = flag("A1", &[-1]);
        assert!(matches!(certify_negative_bound(&rf, &gd, &cfg), Err(Error::NotNegative { .. })));
    }
}
