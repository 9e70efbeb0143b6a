//! Checkable conditions for homogeneous pairs `(M, D)` with `M = G/V`, and
//! for the invertible assumption on Euclidean charts.

use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartDistribution, ChartDomain, Polynomial, C64};
use crate::error::{Error, Result};
use crate::exact::{q, Cq, QStr, Scalar, Q};
use crate::flows::solve_complex;
use crate::grading::{validate_graded_brackets, GradedDecomposition, LevelDim};
use crate::lie::{LieAlgebra, LieAlgebraSpec, RealFormData};
use crate::linalg::{definiteness, is_zero_vec, mat_mul, nullspace, solve, Matrix, Subspace};
use crate::optim::{maximize_on_sphere, SphereOptConfig};

/// `g = v ⊕ m` with `j` on `m` (extended by zero on `v`) and `g₁ℝ ⊆ m`.
/// All vectors are coordinates in the basis of `algebra`; `j` and `theta`
/// act on column vectors.
#[derive(Clone, Debug)]
pub struct HomogeneousDatum {
    pub name: String,
    pub algebra: Arc<LieAlgebra>,
    pub v: Vec<Vec<Q>>,
    pub m: Vec<Vec<Q>>,
    pub j: Matrix<Q>,
    pub g1r: Vec<Vec<Q>>,
    /// Cartan involution with `v ⊆ k`, when known.
    pub theta: Option<Matrix<Q>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSpec {
    pub name: String,
    pub algebra: LieAlgebraSpec,
    pub v: Vec<Vec<QStr>>,
    pub m: Vec<Vec<QStr>>,
    pub j: Vec<Vec<QStr>>,
    pub g1r: Vec<Vec<QStr>>,
    #[serde(default)]
    pub theta: Option<Vec<Vec<QStr>>>,
}

fn unq(m: &[Vec<QStr>]) -> Vec<Vec<Q>> {
    m.iter().map(|r| r.iter().map(|x| x.0).collect()).collect()
}

fn enq(m: &[Vec<Q>]) -> Vec<Vec<QStr>> {
    m.iter().map(|r| r.iter().copied().map(QStr).collect()).collect()
}

fn act<F: Scalar + From<Q>>(m: &Matrix<Q>, x: &[F]) -> Vec<F> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(F::zero(), |acc, (a, b)| if a.is_zero() { acc } else { acc + F::from(*a) * *b }))
        .collect()
}

fn lift(v: &[Q]) -> Vec<Cq> {
    v.iter().map(|x| Cq::real(*x)).collect()
}

fn sub<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

impl HomogeneousDatum {
    pub fn new(
        name: impl Into<String>,
        algebra: Arc<LieAlgebra>,
        v: Vec<Vec<Q>>,
        m: Vec<Vec<Q>>,
        j: Matrix<Q>,
        g1r: Vec<Vec<Q>>,
        theta: Option<Matrix<Q>>,
    ) -> Result<Self> {
        let n = algebra.dim();
        let square = |a: &Matrix<Q>| a.len() == n && a.iter().all(|r| r.len() == n);
        if v.iter().chain(&m).chain(&g1r).any(|x| x.len() != n) || !square(&j) || theta.as_ref().is_some_and(|t| !square(t)) {
            return Err(Error::Fixture("datum vectors and matrices must match the algebra dimension".into()));
        }
        Ok(Self { name: name.into(), algebra, v, m, j, g1r, theta })
    }

    pub fn from_spec(s: &DatumSpec) -> Result<Self> {
        let la = LieAlgebra::from_spec(&s.algebra)?;
        Self::new(s.name.clone(), Arc::new(la), unq(&s.v), unq(&s.m), unq(&s.j), unq(&s.g1r), s.theta.as_deref().map(unq))
    }

    pub fn to_spec(&self) -> DatumSpec {
        DatumSpec {
            name: self.name.clone(),
            algebra: self.algebra.to_spec(),
            v: enq(&self.v),
            m: enq(&self.m),
            j: enq(&self.j),
            g1r: enq(&self.g1r),
            theta: self.theta.as_deref().map(enq),
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn j_apply<F: Scalar + From<Q>>(&self, x: &[F]) -> Vec<F> {
        act(&self.j, x)
    }

    /// Negate `j` on the `j`-invariant plane spanned by basis vectors `a`, `b`.
    pub fn flip_plane(&mut self, a: usize, b: usize) {
        for row in self.j.iter_mut() {
            row[a] = -row[a];
            row[b] = -row[b];
        }
    }
}

/// Real form `g` as an algebra over ℚ in the basis `k` then `q`, with the
/// basis vectors in complex coordinates and the positive root behind each
/// pair element.
pub struct Realified {
    pub algebra: LieAlgebra,
    pub basis: Vec<Vec<Cq>>,
    pub root_of: Vec<Option<usize>>,
}

impl Realified {
    /// Real coordinates of a complex-coordinate vector lying in `g^ℂ`.
    pub fn coordinates(&self, x: &[Cq]) -> Vec<Cq> {
        let n = self.basis.len();
        let m: Matrix<Cq> = (0..n).map(|r| (0..n).map(|c| self.basis[c][r]).collect()).collect();
        solve(&m, x).expect("real basis spans g^C")
    }

    fn real_coordinates(&self, x: &[Cq]) -> Result<Vec<Q>> {
        self.coordinates(x)
            .into_iter()
            .map(|c| if c.is_real() { Ok(c.re) } else { Err(Error::InvalidRealForm("vector is not in the real form".into())) })
            .collect()
    }
}

pub fn realify(rf: &RealFormData) -> Result<Realified> {
    let bd = &rf.basis;
    let rd = &bd.roots;
    let mut names = Vec::new();
    let mut root_of = Vec::new();
    for i in 0..bd.rank() {
        names.push(format!("iH{}", i + 1));
        root_of.push(None);
    }
    let mut q_names = Vec::new();
    let mut q_roots = Vec::new();
    for a in rd.positive_indices() {
        let l = rd.label(a);
        let pair = [format!("X[{l}]"), format!("Y[{l}]")];
        if rf.eps.is_compact(a) {
            names.extend(pair);
            root_of.extend([Some(a), Some(a)]);
        } else {
            q_names.extend(pair);
            q_roots.extend([Some(a), Some(a)]);
        }
    }
    names.extend(q_names);
    root_of.extend(q_roots);
    let basis = rf.real_basis();
    let mut out = Realified { algebra: LieAlgebra::from_table(Vec::new(), Vec::new()), basis, root_of };
    let n = out.basis.len();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = bd.bracket(&out.basis[i], &out.basis[j]);
            if is_zero_vec(&w) {
                continue;
            }
            let c = out.real_coordinates(&w)?;
            entries.push(((i, j), c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()));
        }
    }
    out.algebra = LieAlgebra::from_entries(names, &entries)?;
    Ok(out)
}

/// Datum of the flag domain `G/V` with `v = g ∩ g₀`, `j = ∓i` on positive /
/// negative levels (the holomorphic tangent space is `g_{<0}`) and
/// `g₁ℝ = g ∩ (g₋₁ + g₁)`.
pub fn canonical_datum(rf: &RealFormData, gd: &GradedDecomposition) -> Result<HomogeneousDatum> {
    let levels = gd
        .root_levels
        .as_ref()
        .ok_or_else(|| Error::InvalidGradingElement("grading has no root levels".into()))?;
    let bd = &rf.basis;
    let re = realify(rf)?;
    let n = re.basis.len();
    let i_unit = Cq::i();
    let j_complex = |x: &[Cq]| -> Vec<Cq> {
        let mut out = vec![Cq::real(q(0)); x.len()];
        for a in 0..bd.n_roots() {
            let s = bd.root_slot(a);
            let l = levels[a];
            if l != 0 {
                out[s] = x[s] * i_unit * Cq::real(q(-l.signum() as i128));
            }
        }
        out
    };
    let mut j = vec![vec![q(0); n]; n];
    let mut theta = vec![vec![q(0); n]; n];
    for c in 0..n {
        let jc = re.real_coordinates(&j_complex(&re.basis[c]))?;
        let tc = re.real_coordinates(&rf.theta_apply(&re.basis[c]))?;
        for r in 0..n {
            j[r][c] = jc[r];
            theta[r][c] = tc[r];
        }
    }
    let unit = |k: usize| {
        let mut e = vec![q(0); n];
        e[k] = q(1);
        e
    };
    let level_of = |k: usize| re.root_of[k].map_or(0, |a| levels[a]);
    let v = (0..n).filter(|&k| level_of(k) == 0).map(unit).collect();
    let m = (0..n).filter(|&k| level_of(k) != 0).map(unit).collect();
    let g1r = (0..n).filter(|&k| level_of(k).abs() == 1).map(unit).collect();
    let name = format!("{}/{}", bd.cartan_type(), "V");
    HomogeneousDatum::new(name, Arc::new(re.algebra), v, m, j, g1r, Some(theta))
}

/// `sl(2,ℂ)` as a real algebra acting on itself (`v = 0`), `j` = complex
/// multiplication, `g₁ℝ = ℂe + ℂf`.
pub fn sl2c_real_datum() -> HomogeneousDatum {
    // e, f, h, ie, if, ih
    let complex = [((0usize, 1usize), vec![(2usize, 1i128)]), ((2, 0), vec![(0, 2)]), ((2, 1), vec![(1, -2)])];
    let mut entries = Vec::new();
    for ((a, b), v) in &complex {
        let c: Vec<(usize, Q)> = v.iter().map(|&(k, x)| (k, q(x))).collect();
        let neg: Vec<(usize, Q)> = c.iter().map(|&(k, x)| (k, -x)).collect();
        let shift: Vec<(usize, Q)> = c.iter().map(|&(k, x)| (k + 3, x)).collect();
        let mut push = |i: usize, j: usize, val: Vec<(usize, Q)>| {
            if i < j {
                entries.push(((i, j), val));
            } else {
                entries.push(((j, i), val.iter().map(|&(k, x)| (k, -x)).collect()));
            }
        };
        push(*a, *b, c.clone());
        push(*a, b + 3, shift.clone());
        push(a + 3, *b, shift);
        push(a + 3, b + 3, neg);
    }
    let names = ["e", "f", "h", "ie", "if", "ih"].map(String::from).to_vec();
    let la = LieAlgebra::from_entries(names, &entries).expect("valid structure constants");
    let n = 6;
    let mut j = vec![vec![q(0); n]; n];
    for k in 0..3 {
        j[k + 3][k] = q(1);
        j[k][k + 3] = q(-1);
    }
    // θ(x) = -x*: e ↦ -f, f ↦ -e, h ↦ -h, ie ↦ if, if ↦ ie, ih ↦ ih.
    let mut theta = vec![vec![q(0); n]; n];
    for (c, r, s) in [(0, 1, -1), (1, 0, -1), (2, 2, -1), (3, 4, 1), (4, 3, 1), (5, 5, 1)] {
        theta[r][c] = q(s);
    }
    let unit = |k: usize| (0..n).map(|i| q((i == k) as i128)).collect::<Vec<_>>();
    HomogeneousDatum::new(
        "sl(2,C) real",
        Arc::new(la),
        Vec::new(),
        (0..n).map(unit).collect(),
        j,
        [0, 1, 3, 4].map(unit).to_vec(),
        Some(theta),
    )
    .expect("valid datum")
}

/// `h₃ ⊕ ℝ` with `[X, Y] = Z`, `W` central, `j: X ↦ Y, Z ↦ W` and `g₁ℝ`
/// everything; `[x, jx] = 0` on the central plane `span{Z, W}`.
pub fn abelian_toy_datum() -> HomogeneousDatum {
    let names = ["X", "Y", "Z", "W"].map(String::from).to_vec();
    let la = LieAlgebra::from_entries(names, &[((0, 1), vec![(2, q(1))])]).expect("Heisenberg plus a line");
    let n = 4;
    let mut j = vec![vec![q(0); n]; n];
    j[1][0] = q(1);
    j[0][1] = q(-1);
    j[3][2] = q(1);
    j[2][3] = q(-1);
    let unit = |k: usize| (0..n).map(|i| q((i == k) as i128)).collect::<Vec<_>>();
    let all: Vec<Vec<Q>> = (0..n).map(unit).collect();
    HomogeneousDatum::new("abelian toy", Arc::new(la), Vec::new(), all.clone(), j, all, None)
        .expect("valid datum")
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Cq>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<QStr>>>,
}

impl Witness {
    fn text(detail: impl Into<String>) -> Self {
        Self { detail: detail.into(), vector: None, matrix: None }
    }

    fn vector(detail: impl Into<String>, v: Vec<Cq>) -> Self {
        Self { detail: detail.into(), vector: Some(v), matrix: None }
    }

    fn real(detail: impl Into<String>, v: &[Q]) -> Self {
        Self::vector(detail, lift(v))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    fn new(name: &str, failure: Option<Witness>) -> Self {
        Self { name: name.into(), passed: failure.is_none(), witness: failure }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JAxiomReport {
    pub checks: Vec<Check>,
}

impl JAxiomReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn first_pair<F>(a: &[Vec<Q>], b: &[Vec<Q>], symmetric: bool, mut test: F) -> Option<Witness>
where
    F: FnMut(&[Q], &[Q]) -> Option<Vec<Q>>,
{
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            if symmetric && k < i {
                continue;
            }
            if let Some(defect) = test(x, y) {
                return Some(Witness::real(format!("basis pair ({i}, {k})"), &defect));
            }
        }
    }
    None
}

/// Exact checks of the axioms tying `j` to `v`, `m` and `g₁ℝ`.
pub fn validate_j_axioms(hd: &HomogeneousDatum) -> JAxiomReport {
    let la = &hd.algebra;
    let n = hd.dim();
    let v_space = Subspace::span(n, &hd.v);
    let m_space = Subspace::span(n, &hd.m);
    let g1_space = Subspace::span(n, &hd.g1r);
    let zero = |x: &[Q]| is_zero_vec(x);
    let mut checks = Vec::new();

    let direct = v_space.dim() == hd.v.len()
        && m_space.dim() == hd.m.len()
        && hd.v.len() + hd.m.len() == n
        && v_space.sum(&m_space).dim() == n;
    checks.push(Check::new("g = v + m direct", (!direct).then(|| Witness::text("v and m do not span g independently"))));
    checks.push(Check::new(
        "v subalgebra",
        first_pair(&hd.v, &hd.v, true, |x, y| {
            let b = la.bracket(x, y);
            (!v_space.contains(&b)).then_some(b)
        }),
    ));
    checks.push(Check::new(
        "[v, m] in m",
        first_pair(&hd.v, &hd.m, false, |x, y| {
            let b = la.bracket(x, y);
            (!m_space.contains(&b)).then_some(b)
        }),
    ));
    checks.push(Check::new(
        "j v = 0",
        hd.v.iter().enumerate().find_map(|(i, x)| {
            let jx = hd.j_apply(x);
            (!zero(&jx)).then(|| Witness::real(format!("v basis {i}"), &jx))
        }),
    ));
    checks.push(Check::new(
        "j m in m",
        hd.m.iter().enumerate().find_map(|(i, x)| {
            let jx = hd.j_apply(x);
            (!m_space.contains(&jx)).then(|| Witness::real(format!("m basis {i}"), &jx))
        }),
    ));
    checks.push(Check::new(
        "j^2 = -1 on m",
        hd.m.iter().enumerate().find_map(|(i, x)| {
            let jjx = hd.j_apply(&hd.j_apply(x));
            let d: Vec<Q> = jjx.iter().zip(x).map(|(a, b)| *a + *b).collect();
            (!zero(&d)).then(|| Witness::real(format!("m basis {i}"), &d))
        }),
    ));
    checks.push(Check::new(
        "ad v commutes with j",
        first_pair(&hd.v, &hd.m, false, |x, y| {
            let d = sub(&la.bracket(x, &hd.j_apply(y)), &hd.j_apply(&la.bracket(x, y)));
            (!zero(&d)).then_some(d)
        }),
    ));
    checks.push(Check::new(
        "integrability",
        first_pair(&hd.m, &hd.m, true, |x, y| {
            let (jx, jy) = (hd.j_apply(x), hd.j_apply(y));
            let lhs = la.bracket(&jx, &jy);
            let mut rhs = la.bracket(x, y);
            for t in [hd.j_apply(&la.bracket(&jx, y)), hd.j_apply(&la.bracket(x, &jy))] {
                rhs = rhs.iter().zip(&t).map(|(a, b)| *a + *b).collect();
            }
            let d = sub(&lhs, &rhs);
            (!zero(&d)).then_some(d)
        }),
    ));
    checks.push(Check::new(
        "g1 in m",
        hd.g1r.iter().enumerate().find_map(|(i, x)| (!m_space.contains(x)).then(|| Witness::real(format!("g1 basis {i}"), x))),
    ));
    checks.push(Check::new(
        "[v, g1] in g1",
        first_pair(&hd.v, &hd.g1r, false, |x, y| {
            let b = la.bracket(x, y);
            (!g1_space.contains(&b)).then_some(b)
        }),
    ));
    JAxiomReport { checks }
}

#[derive(Clone, Debug, Serialize)]
pub struct NoComplexLineReport {
    pub passed: bool,
    /// `g₁ℝ = 0`: the condition holds vacuously.
    pub degenerate: bool,
    /// `min ‖[x, jx]‖` over the unit sphere of `g₁ℝ`.
    pub min_value: f64,
    /// Minimizer in algebra coordinates.
    pub witness: Vec<f64>,
    pub spread: f64,
    pub restarts: usize,
    pub tol: f64,
}

fn qf(x: &Q) -> f64 {
    crate::exact::q_to_f64(x)
}

/// Inner product on `g`: `-B(x, θy)` when `θ` is known and this is positive
/// definite, the coordinate inner product otherwise.
fn inner_product(hd: &HomogeneousDatum) -> Matrix<Q> {
    let n = hd.dim();
    if let Some(theta) = &hd.theta {
        let b = hd.algebra.killing_matrix();
        let g: Matrix<Q> = mat_mul(&b, theta).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
        if definiteness(&g) == 1 {
            return g;
        }
    }
    (0..n).map(|i| (0..n).map(|j| q((i == j) as i128)).collect()).collect()
}

/// Multi-start minimization of `‖[x, jx]‖` on the unit sphere of `g₁ℝ`.
pub fn check_no_complex_line(hd: &HomogeneousDatum, cfg: &SphereOptConfig, tol: f64) -> NoComplexLineReport {
    let n = hd.dim();
    let basis = Subspace::span(n, &hd.g1r).basis().to_vec();
    let d = basis.len();
    if d == 0 {
        return NoComplexLineReport {
            passed: true,
            degenerate: true,
            min_value: f64::INFINITY,
            witness: Vec::new(),
            spread: 0.0,
            restarts: 0,
            tol,
        };
    }
    let g: Vec<Vec<f64>> = inner_product(hd).iter().map(|r| r.iter().map(qf).collect()).collect();
    let ip = |a: &[f64], b: &[f64]| -> f64 { (0..n).map(|i| a[i] * (0..n).map(|j| g[i][j] * b[j]).sum::<f64>()).sum() };
    // Gram–Schmidt: e_i = Σ_j r[i][j] b_j orthonormal.
    let bf: Vec<Vec<f64>> = basis.iter().map(|v| v.iter().map(qf).collect()).collect();
    let mut r = vec![vec![0.0; d]; d];
    let mut es: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut coeff = vec![0.0; d];
        coeff[i] = 1.0;
        let mut e = bf[i].clone();
        for k in 0..i {
            let p = ip(&e, &es[k]);
            for t in 0..n {
                e[t] -= p * es[k][t];
            }
            for t in 0..d {
                coeff[t] -= p * r[k][t];
            }
        }
        let nrm = ip(&e, &e).sqrt();
        e.iter_mut().for_each(|x| *x /= nrm);
        coeff.iter_mut().for_each(|x| *x /= nrm);
        r[i] = coeff;
        es.push(e);
    }
    let brackets: Vec<Vec<Vec<f64>>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| hd.algebra.bracket(x, &hd.j_apply(y)).iter().map(qf).collect()).collect())
        .collect();
    let f = |c: &[f64]| {
        let a: Vec<f64> = (0..d).map(|j| (0..d).map(|i| c[i] * r[i][j]).sum()).collect();
        let mut val = vec![0.0; n];
        for j in 0..d {
            for k in 0..d {
                let s = a[j] * a[k];
                for t in 0..n {
                    val[t] += s * brackets[j][k][t];
                }
            }
        }
        let gv: Vec<f64> = (0..n).map(|i| (0..n).map(|t| g[i][t] * val[t]).sum()).collect();
        let norm2: f64 = val.iter().zip(&gv).map(|(x, y)| x * y).sum();
        let grad_a: Vec<f64> = (0..d)
            .map(|m| {
                let mut dv = vec![0.0; n];
                for k in 0..d {
                    for t in 0..n {
                        dv[t] += a[k] * (brackets[m][k][t] + brackets[k][m][t]);
                    }
                }
                -2.0 * dv.iter().zip(&gv).map(|(x, y)| x * y).sum::<f64>()
            })
            .collect();
        // Maximize -‖[x, jx]‖; the norm keeps the gradient large near zeros.
        let norm = norm2.max(0.0).sqrt();
        let scale = if norm > 0.0 { 0.5 / norm } else { 0.0 };
        let grad_c = (0..d).map(|i| scale * (0..d).map(|j| r[i][j] * grad_a[j]).sum::<f64>()).collect();
        (-norm, grad_c)
    };
    let res = maximize_on_sphere(d, f, cfg);
    let min_value = (-res.best.value).max(0.0);
    let c = &res.best.point;
    let witness = (0..n).map(|t| (0..d).map(|i| c[i] * es[i][t]).sum()).collect();
    NoComplexLineReport {
        passed: min_value > tol,
        degenerate: false,
        min_value,
        witness,
        spread: res.spread,
        restarts: cfg.restarts,
        tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    JAxioms,
    NotSemisimple,
    InvalidCartanInvolution,
    NotAlmostEffective,
    CompactFactor,
    ComplexLieAlgebra,
    GradingNotCompatible,
    NotThetaInvariant,
    CompactHorizontal,
    NotSuperhorizontal,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    CanonicalSuperhorizontal,
    Rejected { reason: RejectReason, witness: Witness },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub datum: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    /// Dimensions of the levels `g_l` built from `g₁ℝ` and `j`.
    pub level_dims: Vec<LevelDim>,
    pub notes: Vec<String>,
}

pub const ALMOST_EFFECTIVE_NOTE: &str =
    "almost effective and compact isotropy are checked at algebra level: v contains no nonzero ideal of g and B is negative definite on v";

/// Largest ideal of `la` contained in `s`.
pub fn largest_ideal_in(la: &LieAlgebra, s: &Subspace<Q>) -> Subspace<Q> {
    let n = la.dim();
    let mut cur = s.clone();
    loop {
        let basis = cur.basis().to_vec();
        if basis.is_empty() {
            return cur;
        }
        let mut rows = Vec::new();
        for i in 0..n {
            let e = la.unit::<Q>(i);
            let images: Vec<Vec<Q>> = basis.iter().map(|b| cur.reduce(&la.bracket(&e, b))).collect();
            for t in 0..n {
                let row: Vec<Q> = images.iter().map(|img| img[t]).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let kernel = if rows.is_empty() {
            (0..basis.len()).map(|a| (0..basis.len()).map(|b| q((a == b) as i128)).collect()).collect()
        } else {
            nullspace(&rows, basis.len())
        };
        let vs: Vec<Vec<Q>> = kernel
            .iter()
            .map(|c| (0..n).map(|t| c.iter().zip(&basis).fold(q(0), |acc, (x, b)| acc + *x * b[t])).collect())
            .collect();
        let next = Subspace::span(n, &vs);
        if next.dim() == cur.dim() {
            return next;
        }
        cur = next;
    }
}

/// Basis of the centroid `{A : A ad_x = ad_x A for all x}`.
pub fn centroid(la: &LieAlgebra) -> Vec<Matrix<Q>> {
    let n = la.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        let ad = la.ad_matrix::<Q>(&la.unit(i));
        for r in 0..n {
            for c in 0..n {
                let mut row = vec![q(0); n * n];
                for k in 0..n {
                    row[r * n + k] += ad[k][c];
                    row[k * n + c] -= ad[r][k];
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    nullspace(&rows, n * n).into_iter().map(|v| v.chunks(n).map(|r| r.to_vec()).collect()).collect()
}

/// A vector `w` with `wᵀ G w < 0`, if one exists.
fn negative_direction(g: &Matrix<Q>) -> Option<Vec<Q>> {
    let n = g.len();
    let form = |u: &[Q], v: &[Q]| -> Q {
        (0..n).fold(q(0), |acc, i| acc + u[i] * (0..n).fold(q(0), |s, j| s + g[i][j] * v[j]))
    };
    let mut vs: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| q((i == j) as i128)).collect()).collect();
    for k in 0..n {
        let gk = form(&vs[k], &vs[k]);
        if gk < q(0) {
            return Some(vs[k].clone());
        }
        for j in k + 1..n {
            let gkj = form(&vs[k], &vs[j]);
            if gkj.is_zero() {
                continue;
            }
            if gk.is_zero() {
                let gj = form(&vs[j], &vs[j]);
                if gj < q(0) {
                    return Some(vs[j].clone());
                }
                let t = if gj.is_zero() { if gkj > q(0) { q(-1) } else { q(1) } } else { -gkj / gj };
                return Some(vs[k].iter().zip(&vs[j]).map(|(a, b)| *a + t * *b).collect());
            }
            let t = gkj / gk;
            let vk = vs[k].clone();
            for (a, b) in vs[j].iter_mut().zip(&vk) {
                *a -= t * *b;
            }
        }
    }
    None
}

fn trace(m: &Matrix<Q>) -> Q {
    (0..m.len()).fold(q(0), |acc, i| acc + m[i][i])
}

fn theta_is_cartan(la: &LieAlgebra, theta: &Matrix<Q>) -> Option<Witness> {
    let n = la.dim();
    let id: Matrix<Q> = (0..n).map(|i| (0..n).map(|j| q((i == j) as i128)).collect()).collect();
    if mat_mul(theta, theta) != id {
        return Some(Witness::text("θ is not an involution"));
    }
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (la.unit::<Q>(i), la.unit::<Q>(j));
            let d = sub(&act(theta, &la.bracket(&x, &y)), &la.bracket(&act(theta, &x), &act(theta, &y)));
            if !is_zero_vec(&d) {
                return Some(Witness::real(format!("θ is not an automorphism on ({i}, {j})"), &d));
            }
        }
    }
    let b = la.killing_matrix();
    let g: Matrix<Q> = mat_mul(&b, theta).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
    if definiteness(&g) != 1 {
        return Some(Witness::text("-B(x, θy) is not positive definite"));
    }
    None
}

fn eigenspace(m: &Matrix<Q>, lambda: Q) -> Vec<Vec<Q>> {
    let n = m.len();
    let shifted: Matrix<Q> =
        (0..n).map(|i| (0..n).map(|j| m[i][j] - if i == j { lambda } else { q(0) }).collect()).collect();
    nullspace(&shifted, n)
}

/// Levels `g_l` built from `g₁ = {x - i jx}` and `g₋₁ = {x + i jx}` by
/// iterated brackets modulo `v^ℂ` and lower levels.
struct InducedGrading {
    v: Vec<Vec<Cq>>,
    plus: Vec<Vec<Vec<Cq>>>,
    minus: Vec<Vec<Vec<Cq>>>,
}

impl InducedGrading {
    fn build(hd: &HomogeneousDatum) -> Self {
        let n = hd.dim();
        let i = Cq::i();
        let v: Vec<Vec<Cq>> = hd.v.iter().map(|x| lift(x)).collect();
        let side = |sign: Cq| -> Vec<Vec<Vec<Cq>>> {
            let first: Vec<Vec<Cq>> = hd
                .g1r
                .iter()
                .map(|x| {
                    let jx = hd.j_apply(&lift(x));
                    lift(x).iter().zip(&jx).map(|(a, b)| *a + sign * i * *b).collect()
                })
                .collect();
            let mut space = Subspace::span(n, &v);
            let mut layers = Vec::new();
            let mut layer: Vec<Vec<Cq>> = first.iter().filter(|x| space.insert(x)).cloned().collect();
            let g1 = layer.clone();
            while !layer.is_empty() {
                let mut next = Vec::new();
                for a in &g1 {
                    for b in &layer {
                        let w = hd.algebra.bracket(a, b);
                        if space.insert(&w) {
                            next.push(w);
                        }
                    }
                }
                layers.push(layer);
                layer = next;
            }
            layers
        };
        let plus = side(Cq::real(q(-1)));
        let minus = side(Cq::real(q(1)));
        Self { v, plus, minus }
    }

    fn space(&self, n: usize, plus: bool) -> Subspace<Cq> {
        let layers = if plus { &self.plus } else { &self.minus };
        let all: Vec<Vec<Cq>> = self.v.iter().cloned().chain(layers.iter().flatten().cloned()).collect();
        Subspace::span(n, &all)
    }

    fn parts(&self) -> Vec<(i64, Vec<Vec<Cq>>)> {
        let mut parts = vec![(0, self.v.clone())];
        for (k, l) in self.plus.iter().enumerate() {
            parts.push((k as i64 + 1, l.clone()));
        }
        for (k, l) in self.minus.iter().enumerate() {
            parts.push((-(k as i64) - 1, l.clone()));
        }
        parts
    }
}

/// Run the classification pipeline; every rejection carries a witness.
pub fn classify_homogeneous(hd: &HomogeneousDatum) -> ClassificationReport {
    let mut checks = Vec::new();
    let notes = vec![ALMOST_EFFECTIVE_NOTE.to_string()];
    let mut level_dims = Vec::new();
    let verdict = classify_inner(hd, &mut checks, &mut level_dims);
    ClassificationReport { datum: hd.name.clone(), verdict, checks, level_dims, notes }
}

fn classify_inner(hd: &HomogeneousDatum, checks: &mut Vec<Check>, level_dims: &mut Vec<LevelDim>) -> Verdict {
    let la = &hd.algebra;
    let n = hd.dim();
    let step = |name: &str, reason: RejectReason, failure: Option<Witness>, checks: &mut Vec<Check>| {
        checks.push(Check::new(name, failure.clone()));
        failure.map(|witness| Verdict::Rejected { reason, witness })
    };

    let jr = validate_j_axioms(hd);
    let failure = jr.first_failure().map(|c| {
        let mut w = c.witness.clone().unwrap_or_else(|| Witness::text(""));
        w.detail = format!("{}: {}", c.name, w.detail);
        w
    });
    if let Some(v) = step("j axioms", RejectReason::JAxioms, failure, checks) {
        return v;
    }

    let killing = la.killing_matrix();
    let radical = nullspace(&killing, n);
    let failure = radical.first().map(|w| Witness::real("vector in the radical of the Killing form", w));
    if let Some(v) = step("semisimple", RejectReason::NotSemisimple, failure, checks) {
        return v;
    }

    let Some(theta) = &hd.theta else {
        let w = Witness::text("no Cartan involution supplied");
        return step("Cartan involution", RejectReason::InvalidCartanInvolution, Some(w), checks).unwrap();
    };
    let mut failure = theta_is_cartan(la, theta);
    if failure.is_none() {
        failure = hd.v.iter().find(|x| act(theta, x) != **x).map(|x| Witness::real("v is not contained in k", x));
    }
    if let Some(v) = step("Cartan involution", RejectReason::InvalidCartanInvolution, failure, checks) {
        return v;
    }

    let v_space = Subspace::span(n, &hd.v);
    let v_ideal = largest_ideal_in(la, &v_space);
    let mut failure = v_ideal.basis().first().map(|w| Witness::real("nonzero ideal of g inside v", w));
    if failure.is_none() && !hd.v.is_empty() {
        let gram: Matrix<Q> =
            hd.v.iter().map(|x| hd.v.iter().map(|y| bilinear(&killing, x, y)).collect()).collect();
        if definiteness(&gram) != -1 {
            failure = Some(Witness::text("Killing form is not negative definite on v"));
        }
    }
    if let Some(v) = step("almost effective, compact isotropy", RejectReason::NotAlmostEffective, failure, checks) {
        return v;
    }

    let k = Subspace::span(n, &eigenspace(theta, q(1)));
    let compact = largest_ideal_in(la, &k);
    let g1 = Subspace::span(n, &hd.g1r);
    let failure = if compact.dim() > 0 {
        let meet = compact.intersection(&g1);
        Some(match meet.basis().first() {
            Some(w) => Witness::real("compact ideal meeting g1", w),
            None => Witness::real("compact ideal", &compact.basis()[0]),
        })
    } else {
        None
    };
    if let Some(v) = step("no compact factor", RejectReason::CompactFactor, failure, checks) {
        return v;
    }

    let cent = centroid(la);
    let tform: Matrix<Q> = cent.iter().map(|a| cent.iter().map(|b| trace(&mat_mul(a, b))).collect()).collect();
    let failure = negative_direction(&tform).map(|c| {
        let m: Matrix<Q> = (0..n)
            .map(|r| (0..n).map(|s| c.iter().zip(&cent).fold(q(0), |acc, (x, a)| acc + *x * a[r][s])).collect())
            .collect();
        let t = trace(&mat_mul(&m, &m));
        Witness {
            detail: format!("centroid element A with tr(A^2) = {} < 0 commutes with every ad x", crate::exact::format_q(&t)),
            vector: None,
            matrix: Some(enq(&m)),
        }
    });
    if let Some(v) = step("not a complex Lie algebra", RejectReason::ComplexLieAlgebra, failure, checks) {
        return v;
    }

    let ig = InducedGrading::build(hd);
    let plus = ig.space(n, true);
    let minus = ig.space(n, false);
    let vc = Subspace::span(n, &ig.v);
    let mut failure = None;
    if plus.dim() + minus.dim() != n + vc.dim() || !plus.intersection(&minus).same_as(&vc) {
        failure = Some(Witness::text(format!(
            "levels do not decompose g: dim g_(>=0) = {}, dim g_(<=0) = {}, dim v = {}",
            plus.dim(),
            minus.dim(),
            vc.dim()
        )));
    }
    for (name, s) in [("g_(>=0)", &plus), ("g_(<=0)", &minus)] {
        if failure.is_none() && !la.is_subalgebra(s.basis()) {
            failure = Some(Witness::text(format!("{name} is not a subalgebra")));
        }
    }
    let gd = match failure {
        None => match GradedDecomposition::from_levels(Arc::clone(la), ig.parts()) {
            Ok(gd) => Some(gd),
            Err(e) => {
                failure = Some(Witness::text(e.to_string()));
                None
            }
        },
        Some(_) => None,
    };
    if let Some(v) = step("graded decomposition", RejectReason::GradingNotCompatible, failure, checks) {
        return v;
    }
    let gd = gd.expect("built above");
    *level_dims = gd.dims().into_iter().map(|(level, dim)| LevelDim { level, dim }).collect();
    let brackets = validate_graded_brackets(&gd);
    checks.push(Check::new(
        "graded bracket lemma",
        brackets.violations.first().map(|b| Witness::text(format!("[g_{}, g_-{}] breaks {}", b.i, b.minus_l, b.law))),
    ));

    let failure = [&plus, &minus].into_iter().find_map(|s| {
        s.basis().iter().find_map(|x| {
            let tx = act(theta, x);
            (!s.contains(&tx)).then(|| Witness::vector("θ moves this vector out of its side", x.clone()))
        })
    });
    if let Some(v) = step("theta invariant", RejectReason::NotThetaInvariant, failure, checks) {
        return v;
    }

    let k1 = k.intersection(&g1);
    let failure = k1.basis().first().map(|w| Witness::real("nonzero vector of k ∩ g1", w));
    if let Some(v) = step("g1 in q", RejectReason::CompactHorizontal, failure, checks) {
        return v;
    }

    let failure = superhorizontal_failure(hd, &ig, theta);
    if let Some(v) = step("superhorizontal", RejectReason::NotSuperhorizontal, failure, checks) {
        return v;
    }
    Verdict::CanonicalSuperhorizontal
}

fn bilinear(b: &Matrix<Q>, x: &[Q], y: &[Q]) -> Q {
    x.iter().enumerate().fold(q(0), |acc, (i, xi)| {
        if xi.is_zero() {
            acc
        } else {
            acc + *xi * y.iter().enumerate().fold(q(0), |s, (j, yj)| s + b[i][j] * *yj)
        }
    })
}

/// A grading element in `v^ℂ` acting by `l` on `g_l`, and `θ = (-1)^l` on `g_l`.
fn superhorizontal_failure(hd: &HomogeneousDatum, ig: &InducedGrading, theta: &Matrix<Q>) -> Option<Witness> {
    let la = &hd.algebra;
    let n = hd.dim();
    let mut leveled: Vec<(i64, &Vec<Cq>)> = ig.v.iter().map(|x| (0, x)).collect();
    for (k, l) in ig.plus.iter().enumerate() {
        leveled.extend(l.iter().map(|x| (k as i64 + 1, x)));
    }
    for (k, l) in ig.minus.iter().enumerate() {
        leveled.extend(l.iter().map(|x| (-(k as i64) - 1, x)));
    }
    // Unknown T = Σ t_a v_a:  Σ t_a [v_a, x] = l x.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (l, x) in &leveled {
        let cols: Vec<Vec<Cq>> = ig.v.iter().map(|va| la.bracket(va, x)).collect();
        for t in 0..n {
            rows.push(cols.iter().map(|c| c[t]).collect::<Vec<_>>());
            rhs.push(x[t] * Cq::real(q(*l as i128)));
        }
    }
    let solvable = if ig.v.is_empty() {
        rhs.iter().all(|x| x.is_zero())
    } else {
        let mut aug: Matrix<Cq> = rows.iter().zip(&rhs).map(|(r, b)| r.iter().copied().chain([*b]).collect()).collect();
        let pivots = crate::linalg::rref(&mut aug);
        !pivots.contains(&ig.v.len())
    };
    if !solvable {
        return Some(Witness::text("no grading element in v^C acts by the level on each g_l"));
    }
    leveled.iter().find_map(|(l, x)| {
        let sign = Cq::real(q(if l % 2 == 0 { 1 } else { -1 }));
        let tx = act(theta, x);
        let want: Vec<Cq> = x.iter().map(|c| *c * sign).collect();
        (tx != want).then(|| Witness::vector(format!("θ is not (-1)^l on level {l}"), (*x).clone()))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelianIdealReport {
    /// `r ∩ v = 0`.
    pub effective: bool,
    pub effective_witness: Option<Vec<QStr>>,
    pub lhs: Vec<Vec<QStr>>,
    pub rhs: Vec<Vec<QStr>>,
    /// `[g, g] ∩ r = [r, g]`.
    pub identity_holds: bool,
}

/// Exact verification of `r ∩ v = 0` and `[g, g] ∩ r = [r, g]` for an
/// abelian ideal `r`.
pub fn validate_abelian_ideal_lemmas(la: &LieAlgebra, v: &[Vec<Q>], r: &[Vec<Q>]) -> Result<AbelianIdealReport> {
    let n = la.dim();
    if r.iter().chain(v).any(|x| x.len() != n) {
        return Err(Error::InvalidIdeal("vector length does not match the algebra".into()));
    }
    if !la.is_ideal(r) {
        return Err(Error::InvalidIdeal("r is not an ideal".into()));
    }
    if !la.bracket_span(r, r).basis().is_empty() {
        return Err(Error::InvalidIdeal("r is not abelian".into()));
    }
    let rs = Subspace::span(n, r);
    let meet = rs.intersection(&Subspace::span(n, v));
    let all: Vec<Vec<Q>> = (0..n).map(|i| la.unit(i)).collect();
    let derived = la.bracket_span(&all, &all);
    let lhs = derived.intersection(&rs);
    let rhs = la.bracket_span(rs.basis(), &all);
    Ok(AbelianIdealReport {
        effective: meet.dim() == 0,
        effective_witness: meet.basis().first().map(|w| crate::exact::qs(w)),
        identity_holds: lhs.same_as(&rhs),
        lhs: enq(lhs.basis()),
        rhs: enq(rhs.basis()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    /// A minor has constant nonzero determinant.
    Proven,
    /// No zero seen on the sample grid; this is not a proof.
    Sampled,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForstnericReport {
    pub confidence: Confidence,
    /// Rows of the chosen `d × d` minor of the frame matrix.
    pub rows: Option<Vec<usize>>,
    /// Determinant terms `(exponents, coefficient)`.
    pub determinant: Option<Vec<(Vec<u32>, Cq)>>,
    /// `min |det|` over the sample grid when sampled.
    pub margin: Option<f64>,
    pub zero_witness: Option<Vec<C64>>,
    /// The chosen minor is the leading block used by the disc construction.
    pub leading_block: bool,
    pub note: String,
}

fn poly_det(m: &[Vec<Polynomial>]) -> Polynomial {
    let d = m.len();
    let nv = m[0][0].nvars();
    if d == 1 {
        return m[0][0].clone();
    }
    let mut out = Polynomial::zero(nv);
    for c in 0..d {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, p)| p.clone()).collect()).collect();
        let term = m[0][c].mul(&poly_det(&minor));
        out = if c % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 && cur[0] >= n - k {
                return out;
            }
        }
        cur[i] += 1;
        for t in i + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// Newton iteration for a zero of `p` from `z` along `conj(∇p)`.
fn polish_zero(p: &Polynomial, mut z: Vec<C64>, radius: f64) -> Option<Vec<C64>> {
    let grads: Vec<Polynomial> = (0..z.len()).map(|k| p.derivative(k)).collect();
    for _ in 0..60 {
        let v = p.eval(&z);
        if v.norm() < 1e-13 {
            return z.iter().all(|c| c.re.abs() <= radius && c.im.abs() <= radius).then_some(z);
        }
        let g: Vec<C64> = grads.iter().map(|d| d.eval(&z)).collect();
        let g2: f64 = g.iter().map(|c| c.norm_sqr()).sum();
        if g2 == 0.0 {
            return None;
        }
        for (zi, gi) in z.iter_mut().zip(&g) {
            *zi -= v * gi.conj() / g2;
        }
    }
    None
}

/// Look for a `d × d` minor of the frame matrix whose determinant does not
/// vanish on the chart box.
pub fn check_forstneric_assumption(cd: &ChartDistribution, per_axis: usize) -> ForstnericReport {
    let (n, d) = (cd.n, cd.rank());
    let entry = |r: usize, c: usize| cd.frame[c].0[r].clone();
    let minors: Vec<(Vec<usize>, Polynomial)> = combinations(n, d)
        .into_iter()
        .map(|rows| {
            let m: Vec<Vec<Polynomial>> = rows.iter().map(|&r| (0..d).map(|c| entry(r, c)).collect()).collect();
            (rows, poly_det(&m))
        })
        .collect();
    let terms = |p: &Polynomial| p.terms().map(|(e, c)| (e.clone(), *c)).collect::<Vec<_>>();
    let lead: Vec<usize> = (0..d).collect();
    if let Some((rows, p)) = minors.iter().find(|(_, p)| p.as_constant().is_some_and(|c| !c.is_zero())) {
        return ForstnericReport {
            confidence: Confidence::Proven,
            rows: Some(rows.clone()),
            determinant: Some(terms(p)),
            margin: None,
            zero_witness: None,
            leading_block: *rows == lead,
            note: "determinant is a nonzero constant".into(),
        };
    }
    let grid = cd.sample_grid(per_axis);
    let radius = cd.box_radius;
    let mut best: Option<(f64, &Vec<usize>, &Polynomial)> = None;
    let mut witness = None;
    for (rows, p) in &minors {
        if p.is_zero() {
            continue;
        }
        let (mut lo, mut at) = (f64::INFINITY, 0);
        for (k, z) in grid.iter().enumerate() {
            let v = p.eval(z).norm();
            if v < lo {
                lo = v;
                at = k;
            }
        }
        let zero = polish_zero(p, grid[at].clone(), radius).filter(|z| cd.in_domain(z) || cd.domain == ChartDomain::Entire);
        match zero {
            Some(z) => {
                if witness.is_none() {
                    witness = Some(z);
                }
            }
            None => {
                if best.is_none_or(|b| lo > b.0) {
                    best = Some((lo, rows, p));
                }
            }
        }
    }
    match best {
        Some((margin, rows, p)) => ForstnericReport {
            confidence: Confidence::Sampled,
            rows: Some(rows.clone()),
            determinant: Some(terms(p)),
            margin: Some(margin),
            zero_witness: None,
            leading_block: *rows == lead,
            note: "no zero found on the sample grid; sampling does not prove nonvanishing".into(),
        },
        None => ForstnericReport {
            confidence: Confidence::Failed,
            rows: None,
            determinant: None,
            margin: None,
            zero_witness: witness,
            leading_block: false,
            note: "every minor vanishes somewhere in the chart box".into(),
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CnReport {
    pub n: u32,
    pub rank: usize,
    /// Sampled `sup |(F_T F_H⁻¹)_{ji}|` over the distinguished boundary of `2^N Δⁿ`.
    pub sup: f64,
    /// `2^N + d·2^{2N}·sup`.
    pub formula: f64,
    pub safety: f64,
    pub c_n: f64,
    pub samples: usize,
}

/// `C_N = 1.01·(2^N + d·2^{2N}·sup)`, the sup sampled on the torus
/// `|z_i| = 2^N` (maximum principle for polynomial entries).
pub fn compute_cn(cd: &ChartDistribution, level: u32) -> Result<CnReport> {
    let (n, d) = (cd.n, cd.rank());
    let radius = 2f64.powi(level as i32);
    if cd.domain == ChartDomain::Polydisc && radius >= cd.box_radius {
        return Err(Error::UnboundedEntry(format!("polydisc of radius {radius} leaves the chart")));
    }
    let per = ((20_000f64).powf(1.0 / n as f64).floor() as usize).clamp(4, 64);
    let total = per.pow(n as u32);
    let mut sup: f64 = 0.0;
    for mut idx in 0..total {
        let z: Vec<C64> = (0..n)
            .map(|_| {
                let k = idx % per;
                idx /= per;
                C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / per as f64)
            })
            .collect();
        let m = cd.frame_matrix(&z);
        let head: Vec<Vec<C64>> = m[..d].to_vec();
        for r in d..n {
            // Row r of F_T F_H⁻¹ solves F_Hᵀ x = (row r of F_T)ᵀ.
            let ht: Vec<Vec<C64>> = (0..d).map(|a| (0..d).map(|b| head[b][a]).collect()).collect();
            let row = solve_complex(&ht, &m[r]).ok_or_else(|| Error::UnboundedEntry("leading block is singular".into()))?;
            for x in row {
                if !x.is_finite() {
                    return Err(Error::UnboundedEntry("entry is not finite".into()));
                }
                sup = sup.max(x.norm());
            }
        }
    }
    let formula = radius + d as f64 * radius * radius * sup;
    let safety = 1.01;
    Ok(CnReport { n: level, rank: d, sup, formula, safety, c_n: safety * formula, samples: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{heisenberg, VectorField};
    use crate::grading::{grade, grading_element};
    use crate::lie::{apply_real_form, build_for_type, EpsilonLabels};

    fn flag(ty: &str, eps: &[i8], v: &[usize]) -> (RealFormData, GradedDecomposition) {
        let bd = Arc::new(build_for_type(ty.parse().unwrap()));
        let labels = EpsilonLabels::from_simple(&bd.roots, eps).unwrap();
        let rf = apply_real_form(&bd, &labels).unwrap();
        let t = grading_element(&bd.roots, v).unwrap();
        let gd = grade(&bd, &t).unwrap();
        (rf, gd)
    }

    #[test]
    fn su21_datum() {
        let (rf, gd) = flag("A2", &[1, 1], &[]);
        let hd = canonical_datum(&rf, &gd).unwrap();
        assert_eq!((hd.v.len(), hd.m.len(), hd.g1r.len()), (2, 6, 4));
        assert!(validate_j_axioms(&hd).passes());
        let rep = classify_homogeneous(&hd);
        assert!(matches!(rep.verdict, Verdict::CanonicalSuperhorizontal), "{:?}", rep.verdict);
        let dims: Vec<usize> = rep.level_dims.iter().map(|l| l.dim).collect();
        assert_eq!(dims, vec![1, 2, 2, 2, 1]);
        let ncl = check_no_complex_line(&hd, &SphereOptConfig { restarts: 8, ..Default::default() }, 1e-8);
        assert!(ncl.passed && ncl.min_value > 0.1);
    }

    #[test]
    fn flipped_plane_is_not_integrable() {
        let (rf, gd) = flag("A2", &[1, 1], &[]);
        let mut hd = canonical_datum(&rf, &gd).unwrap();
        let top = hd.algebra.names.iter().position(|s| s == "X[a1+a2]").unwrap();
        hd.flip_plane(top, top + 1);
        let rep = validate_j_axioms(&hd);
        assert_eq!(rep.first_failure().unwrap().name, "integrability");
    }

    #[test]
    fn rejections() {
        let (rf, gd) = flag("A1", &[-1], &[]);
        let hd = canonical_datum(&rf, &gd).unwrap();
        let v = classify_homogeneous(&hd).verdict;
        assert!(matches!(v, Verdict::Rejected { reason: RejectReason::CompactFactor, .. }), "{v:?}");

        let v = classify_homogeneous(&sl2c_real_datum()).verdict;
        assert!(matches!(v, Verdict::Rejected { reason: RejectReason::ComplexLieAlgebra, .. }), "{v:?}");

        let (rf, gd) = flag("A2", &[-1, 1], &[]);
        let hd = canonical_datum(&rf, &gd).unwrap();
        let v = classify_homogeneous(&hd).verdict;
        let Verdict::Rejected { reason: RejectReason::CompactHorizontal, witness } = v else { panic!("{v:?}") };
        let w: Vec<Q> = witness.vector.unwrap().iter().map(|c| c.re).collect();
        let theta = hd.theta.as_ref().unwrap();
        assert_eq!(act(theta, &w), w);
        assert!(Subspace::span(hd.dim(), &hd.g1r).contains(&w));
    }

    #[test]
    fn abelian_toy_has_complex_line() {
        let hd = abelian_toy_datum();
        assert!(validate_j_axioms(&hd).passes());
        let r = check_no_complex_line(&hd, &SphereOptConfig { restarts: 4, ..Default::default() }, 1e-8);
        assert!(!r.passed && r.min_value < 1e-8 && r.witness.len() == 4);
        assert!(r.witness[0].abs() < 1e-4 && r.witness[1].abs() < 1e-4);
    }

    #[test]
    fn abelian_ideal_lemmas() {
        let h = LieAlgebra::from_entries(vec!["x".into(), "y".into(), "z".into()], &[((0, 1), vec![(2, q(1))])]).unwrap();
        let r = vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]];
        let rep = validate_abelian_ideal_lemmas(&h, &[], &r).unwrap();
        assert!(rep.identity_holds && rep.effective && rep.lhs.len() == 1);
        let two = LieAlgebra::from_entries(vec!["x".into(), "y".into()], &[((0, 1), vec![(1, q(1))])]).unwrap();
        let rep = validate_abelian_ideal_lemmas(&two, &[], &[vec![q(0), q(1)]]).unwrap();
        assert!(rep.identity_holds && rep.rhs.len() == 1);
        assert!(matches!(validate_abelian_ideal_lemmas(&two, &[], &[vec![q(1), q(0)]]), Err(Error::InvalidIdeal(_))));
    }

    #[test]
    fn forstneric() {
        let h = heisenberg(2.0);
        let rep = check_forstneric_assumption(&h, 5);
        assert_eq!(rep.confidence, Confidence::Proven);
        assert!(rep.leading_block);
        let c1 = compute_cn(&h, 1).unwrap();
        assert!((c1.sup - 2.0).abs() < 1e-12 && (c1.formula - 18.0).abs() < 1e-9);
        let c0 = compute_cn(&h, 0).unwrap();
        assert!((c0.formula - 3.0).abs() < 1e-9);

        let z = Polynomial::var(1, 0);
        let bad = ChartDistribution::new("z", vec![VectorField(vec![z])], Vec::new(), 1.0, ChartDomain::Entire).unwrap();
        let rep = check_forstneric_assumption(&bad, 5);
        assert_eq!(rep.confidence, Confidence::Failed);
        assert!(rep.zero_witness.unwrap()[0].norm() < 1e-12);
    }
}
