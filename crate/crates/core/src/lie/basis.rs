//! Root-space basis of a classical complex simple Lie algebra with exact
//! structure constants and Killing form.
//!
//! The algebra is realized by matrices (`sl`, `so`, `sp` in a split form where
//! the diagonal is a Cartan subalgebra). Root vectors are primitive integral
//! matrices with `e_{-α} = e_αᵀ`; the Cartan part uses the simple coroots
//! `H_i` (`α_i(H_i) = 2`). Each root pair is then rescaled by one common
//! rational factor so that `b_α = B(e_α, e_{-α})` is a square-free integer;
//! when `b_α = 1` the basis satisfies the root normalization literally,
//! otherwise the normalized vectors are `e_α / √b_α` and every identity is
//! checked in that ratio form.

use serde::Serialize;

use crate::exact::{format_q, q, Cq, Scalar, Q};
use crate::lie::algebra::{LieAlgebra, SparseVec};
use crate::lie::roots::{build_root_system, CartanType, Family, RootDatum};
use crate::linalg::{rref, transpose, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisTag {
    Root(usize),
    Cartan(usize),
}

/// Exact real number of the form `sign · √square`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedSqrt {
    pub sign: i8,
    pub square: Q,
}

impl SignedSqrt {
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * crate::exact::q_to_f64(&self.square).sqrt()
    }
}

impl std::ops::Neg for SignedSqrt {
    type Output = SignedSqrt;
    fn neg(self) -> SignedSqrt {
        SignedSqrt { sign: -self.sign, square: self.square }
    }
}

#[derive(Clone, Debug)]
pub struct BasisData {
    pub roots: RootDatum,
    pub tags: Vec<BasisTag>,
    pub algebra: LieAlgebra,
    pub killing: Matrix<Q>,
    /// `b_α = B(e_α, e_{-α})` per root index.
    pub b: Vec<Q>,
    /// `h_α` (with `B(h_α, ·) = α`) in coordinates over `H_1, …, H_r`.
    pub coroots: Vec<Vec<Q>>,
    /// Defining-representation matrix of every basis vector.
    pub matrices: Vec<Matrix<Q>>,
}

/// Outcome of the exact checks of the root normalization identities.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct NormalizationReport {
    /// `B(e_α, e_β) = b_α δ_{α,-β}` and `[e_α, e_{-α}] = b_α h_α`.
    pub killing_pairing: bool,
    /// `B(h_α, x) = α(x)` on the Cartan subalgebra.
    pub coroot_duality: bool,
    /// `[e_α, e_β] = 0` when `α ≠ -β` and `α + β` is not a root.
    pub vanishing_brackets: bool,
    /// `N_{α,β}` nonzero real whenever `α, β, α + β` are roots.
    pub structure_constants_nonzero: bool,
    /// `N_{-α,-β} = -N_{α,β}`.
    pub negation_antisymmetry: bool,
    /// `N_{-α,-β} = N_{-β,α+β}` (normalized constants).
    pub cyclic_first: bool,
    /// `N_{-β,α+β} = N_{α+β,-α}` (normalized constants).
    pub cyclic_second: bool,
    /// Every `b_α` equals one, so no ratio form was needed.
    pub fully_normalized: bool,
}

impl NormalizationReport {
    pub fn all_hold(&self) -> bool {
        self.killing_pairing
            && self.coroot_duality
            && self.vanishing_brackets
            && self.structure_constants_nonzero
            && self.negation_antisymmetry
            && self.cyclic_first
            && self.cyclic_second
    }
}

enum Form {
    Traceless,
    Symmetric(Matrix<Q>),
    Symplectic(Matrix<Q>),
}

struct Realization {
    size: usize,
    weights: Vec<Vec<i64>>,
    form: Form,
}

fn realization(ct: CartanType) -> Realization {
    let r = ct.rank;
    let unit = |i: usize, sign: i64| {
        let mut v = vec![0i64; r];
        v[i] = sign;
        v
    };
    match ct.family {
        Family::A => {
            let n = r + 1;
            let weights = (0..n)
                .map(|a| {
                    let mut v = vec![0i64; n];
                    v[a] = 1;
                    v
                })
                .collect();
            Realization { size: n, weights, form: Form::Traceless }
        }
        Family::B => {
            let n = 2 * r + 1;
            let mut weights: Vec<Vec<i64>> = (0..r).map(|i| unit(i, 1)).collect();
            weights.extend((0..r).map(|i| unit(i, -1)));
            weights.push(vec![0; r]);
            let mut s = vec![vec![q(0); n]; n];
            for i in 0..r {
                s[i][r + i] = q(1);
                s[r + i][i] = q(1);
            }
            s[2 * r][2 * r] = q(1);
            Realization { size: n, weights, form: Form::Symmetric(s) }
        }
        Family::C | Family::D => {
            let n = 2 * r;
            let mut weights: Vec<Vec<i64>> = (0..r).map(|i| unit(i, 1)).collect();
            weights.extend((0..r).map(|i| unit(i, -1)));
            let mut s = vec![vec![q(0); n]; n];
            for i in 0..r {
                s[i][r + i] = q(1);
                s[r + i][i] = if ct.family == Family::C { q(-1) } else { q(1) };
            }
            let form = if ct.family == Family::C { Form::Symplectic(s) } else { Form::Symmetric(s) };
            Realization { size: n, weights, form }
        }
    }
}

fn mat_mul_q(a: &Matrix<Q>, b: &Matrix<Q>) -> Matrix<Q> {
    crate::linalg::mat_mul(a, b)
}

fn commutator(a: &Matrix<Q>, b: &Matrix<Q>) -> Matrix<Q> {
    let ab = mat_mul_q(a, b);
    let ba = mat_mul_q(b, a);
    ab.iter().zip(&ba).map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p - *q).collect()).collect()
}

impl Realization {
    /// Projection of a matrix onto the Lie algebra (up to a factor).
    fn project(&self, y: &Matrix<Q>) -> Matrix<Q> {
        match &self.form {
            Form::Traceless => y.clone(),
            Form::Symmetric(s) => {
                let t = mat_mul_q(&mat_mul_q(s, &transpose(y)), s);
                y.iter().zip(&t).map(|(a, b)| a.iter().zip(b).map(|(x, z)| *x - *z).collect()).collect()
            }
            Form::Symplectic(j) => {
                let t = mat_mul_q(&mat_mul_q(j, &transpose(y)), j);
                y.iter().zip(&t).map(|(a, b)| a.iter().zip(b).map(|(x, z)| *x + *z).collect()).collect()
            }
        }
    }
}

fn primitive(m: Matrix<Q>) -> Matrix<Q> {
    let mut g: i128 = 0;
    let mut first_sign = 0i128;
    for x in m.iter().flatten() {
        debug_assert!(x.is_integer());
        let v = *x.numer();
        if v != 0 && first_sign == 0 {
            first_sign = v.signum();
        }
        g = num_integer::gcd(g, v);
    }
    if g == 0 {
        return m;
    }
    let f = Q::new(first_sign, g);
    m.into_iter().map(|r| r.into_iter().map(|x| x * f).collect()).collect()
}

/// Largest `s` with `s²` dividing `m` (m > 0, small).
fn square_part(mut m: i128) -> i128 {
    let mut s = 1;
    let mut p = 2;
    while p * p <= m {
        while m % (p * p) == 0 {
            m /= p * p;
            s *= p;
        }
        p += 1;
    }
    s
}

pub fn build_normalized_basis(rd: &RootDatum) -> BasisData {
    let ct = rd.cartan_type;
    let real = realization(ct);
    let n = real.size;
    let r = rd.rank();
    let n_roots = rd.len();
    let dim = n_roots + r;

    let unit_matrix = |a: usize, b: usize| {
        let mut m = vec![vec![q(0); n]; n];
        m[a][b] = q(1);
        m
    };
    let eps_dim = ct.eps_dim();
    let weight_diff = |a: usize, b: usize| -> Vec<i64> {
        (0..eps_dim).map(|c| real.weights[a][c] - real.weights[b][c]).collect()
    };

    let mut matrices: Vec<Matrix<Q>> = vec![Vec::new(); dim];
    for k in rd.positive_indices() {
        let target = rd.to_eps(&rd.roots[k]);
        let mut found = None;
        'search: for a in 0..n {
            for b in 0..n {
                if a != b && weight_diff(a, b) == target {
                    let x = real.project(&unit_matrix(a, b));
                    if x.iter().flatten().any(|v| *v != q(0)) {
                        found = Some(primitive(x));
                        break 'search;
                    }
                }
            }
        }
        let e = found.expect("every root has a matrix root vector");
        matrices[rd.negative_of(k)] = transpose(&e);
        matrices[k] = e;
    }
    let eval_root_eps = |alpha_eps: &[i64], h: &Matrix<Q>| -> Q {
        alpha_eps.iter().enumerate().map(|(c, &k)| q(k as i128) * h[c][c]).sum()
    };
    for i in 0..r {
        let h = commutator(&matrices[i], &matrices[rd.negative_of(i)]);
        let v = eval_root_eps(&rd.to_eps(&rd.roots[i]), &h);
        let f = q(2) / v;
        matrices[n_roots + i] = h.into_iter().map(|row| row.into_iter().map(|x| x * f).collect()).collect();
    }

    let mut tags: Vec<BasisTag> = (0..n_roots).map(BasisTag::Root).collect();
    tags.extend((0..r).map(BasisTag::Cartan));

    let coords = Coordinatizer::new(&matrices, n_roots, r);
    let mut brackets: Vec<Vec<SparseVec>> = vec![vec![Vec::new(); dim]; dim];
    for i in 0..dim {
        for j in i + 1..dim {
            let c = coords.coordinates(&commutator(&matrices[i], &matrices[j]));
            brackets[j][i] = c.iter().map(|&(k, v)| (k, -v)).collect();
            brackets[i][j] = c;
        }
    }
    let killing = LieAlgebra::from_table(brackets.clone(), Vec::new()).killing_matrix();

    // Symmetric rescaling of each root pair.
    let mut scale = vec![q(1); dim];
    for k in rd.positive_indices() {
        let b = killing[k][rd.negative_of(k)];
        assert!(b > q(0), "B(e_α, e_-α) must be positive in the compact-compatible basis");
        let m = b.numer() * b.denom();
        let s = Q::new(*b.denom(), square_part(m));
        scale[k] = s;
        scale[rd.negative_of(k)] = s;
    }
    let brackets: Vec<Vec<SparseVec>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    brackets[i][j].iter().map(|&(k, v)| (k, v * scale[i] * scale[j] / scale[k])).collect()
                })
                .collect()
        })
        .collect();
    let killing: Matrix<Q> =
        (0..dim).map(|i| (0..dim).map(|j| killing[i][j] * scale[i] * scale[j]).collect()).collect();
    let matrices: Vec<Matrix<Q>> = matrices
        .into_iter()
        .zip(&scale)
        .map(|(m, &s)| m.into_iter().map(|row| row.into_iter().map(|x| x * s).collect()).collect())
        .collect();

    let b: Vec<Q> = (0..n_roots).map(|k| killing[k][rd.negative_of(k)]).collect();
    let coroots = (0..n_roots)
        .map(|k| {
            let br = &brackets[k][rd.negative_of(k)];
            let mut h = vec![q(0); r];
            for &(slot, v) in br {
                assert!(slot >= n_roots, "[e_α, e_-α] lies in the Cartan subalgebra");
                h[slot - n_roots] = v / b[k];
            }
            h
        })
        .collect();

    let names = (0..dim)
        .map(|k| if k < n_roots { format!("e[{}]", rd.label(k)) } else { format!("H{}", k - n_roots + 1) })
        .collect();
    let algebra = LieAlgebra::from_table(brackets, names);
    BasisData { roots: rd.clone(), tags, algebra, killing, b, coroots, matrices }
}

pub fn build_for_type(ct: CartanType) -> BasisData {
    build_normalized_basis(&build_root_system(ct))
}

/// Reads basis coordinates off a matrix of the realization.
struct Coordinatizer<'a> {
    basis: &'a [Matrix<Q>],
    witness: Vec<(usize, usize, Q)>,
    diag_rows: Vec<usize>,
    diag_inverse: Matrix<Q>,
    n_roots: usize,
}

impl<'a> Coordinatizer<'a> {
    fn new(basis: &'a [Matrix<Q>], n_roots: usize, rank: usize) -> Self {
        let witness = basis[..n_roots]
            .iter()
            .map(|m| {
                let mut w = None;
                'find: for (a, row) in m.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        if a != b && *v != q(0) {
                            w = Some((a, b, *v));
                            break 'find;
                        }
                    }
                }
                w.expect("root vectors are off-diagonal")
            })
            .collect();
        let size = basis[0].len();
        // Rows: diagonal positions; columns: Cartan generators.
        let diag: Matrix<Q> =
            (0..size).map(|p| (0..rank).map(|i| basis[n_roots + i][p][p]).collect()).collect();
        let mut t = transpose(&diag);
        let diag_rows = rref(&mut t);
        let square: Matrix<Q> = diag_rows.iter().map(|&p| diag[p].clone()).collect();
        let diag_inverse = invert(&square);
        Self { basis, witness, diag_rows, diag_inverse, n_roots }
    }

    fn coordinates(&self, x: &Matrix<Q>) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, &(a, b, w)) in self.witness.iter().enumerate() {
            let v = x[a][b];
            if v != q(0) {
                out.push((k, v / w));
            }
        }
        let rhs: Vec<Q> = self.diag_rows.iter().map(|&p| x[p][p]).collect();
        for (i, row) in self.diag_inverse.iter().enumerate() {
            let v: Q = row.iter().zip(&rhs).map(|(a, b)| *a * *b).sum();
            if v != q(0) {
                out.push((self.n_roots + i, v));
            }
        }
        // Reconstruction must be exact.
        let size = x.len();
        let mut y = vec![vec![q(0); size]; size];
        for &(k, v) in &out {
            for (yr, br) in y.iter_mut().zip(&self.basis[k]) {
                for (ye, be) in yr.iter_mut().zip(br) {
                    *ye += v * *be;
                }
            }
        }
        assert!(&y == x, "matrix is not in the span of the basis");
        out
    }
}

fn invert(m: &Matrix<Q>) -> Matrix<Q> {
    let n = m.len();
    let mut aug: Matrix<Q> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { q(1) } else { q(0) }));
            r
        })
        .collect();
    rref(&mut aug);
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

impl BasisData {
    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn rank(&self) -> usize {
        self.roots.rank()
    }

    pub fn cartan_type(&self) -> CartanType {
        self.roots.cartan_type
    }

    pub fn n_roots(&self) -> usize {
        self.roots.len()
    }

    /// Basis slot of the root vector `e_α`.
    pub fn root_slot(&self, root: usize) -> usize {
        root
    }

    pub fn cartan_slot(&self, i: usize) -> usize {
        self.n_roots() + i
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Q)] {
        self.algebra.bracket_basis(i, j)
    }

    pub fn unit<F: Scalar>(&self, slot: usize) -> Vec<F> {
        self.algebra.unit(slot)
    }

    pub fn bracket<F: Scalar + From<Q>>(&self, x: &[F], y: &[F]) -> Vec<F> {
        self.algebra.bracket(x, y)
    }

    /// Killing form, complex bilinear.
    pub fn killing_form<F: Scalar + From<Q>>(&self, x: &[F], y: &[F]) -> F {
        let mut s = F::zero();
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let b = self.killing[i][j];
                if b != q(0) {
                    s = s + *xi * *yj * F::from(b);
                }
            }
        }
        s
    }

    /// Matrix of `ad x` (columns are images of basis vectors).
    pub fn ad_matrix<F: Scalar + From<Q>>(&self, x: &[F]) -> Matrix<F> {
        self.algebra.ad_matrix(x)
    }

    /// Value `α(x)` of a root on a Cartan element given in `H_i` coordinates.
    pub fn root_on_cartan(&self, root: usize, h: &[Q]) -> Q {
        let a = &self.roots.roots[root];
        h.iter().enumerate().map(|(j, t)| *t * self.roots.coroot_value(a, j)).sum()
    }

    /// Embed Cartan coordinates as an algebra vector.
    pub fn cartan_vector<F: Scalar + From<Q>>(&self, h: &[Q]) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim()];
        for (i, t) in h.iter().enumerate() {
            v[self.cartan_slot(i)] = F::from(*t);
        }
        v
    }

    /// `N_{α,β}` in this basis, when `α + β` is a root.
    pub fn n_coeff(&self, a: usize, b: usize) -> Option<Q> {
        let s = self.roots.sum_of(a, b)?;
        Some(self.bracket_basis(a, b).iter().find(|(k, _)| *k == s).map_or(q(0), |(_, v)| *v))
    }

    /// Structure constant of the normalized vectors `e_α / √b_α`.
    pub fn normalized_n(&self, a: usize, b: usize) -> Option<SignedSqrt> {
        let s = self.roots.sum_of(a, b)?;
        let n = self.n_coeff(a, b)?;
        Some(SignedSqrt {
            sign: crate::exact::sign_q(&n),
            square: n * n * self.b[s] / (self.b[a] * self.b[b]),
        })
    }

    pub fn jacobi_violations(&self) -> usize {
        self.algebra.jacobi_violations()
    }

    /// Number of basis triples where `B([x,y],z) + B(y,[x,z]) ≠ 0`.
    pub fn killing_invariance_violations(&self) -> usize {
        let dim = self.dim();
        let mut bad = 0;
        for i in 0..dim {
            let x = self.unit::<Q>(i);
            for j in 0..dim {
                let y = self.unit::<Q>(j);
                let xy = self.bracket(&x, &y);
                for k in 0..dim {
                    let z = self.unit::<Q>(k);
                    let xz = self.bracket(&x, &z);
                    if self.killing_form(&xy, &z) + self.killing_form(&y, &xz) != q(0) {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    pub fn normalization_report(&self) -> NormalizationReport {
        let rd = &self.roots;
        let nr = rd.len();
        let r = self.rank();
        let mut rep = NormalizationReport {
            killing_pairing: true,
            coroot_duality: true,
            vanishing_brackets: true,
            structure_constants_nonzero: true,
            negation_antisymmetry: true,
            cyclic_first: true,
            cyclic_second: true,
            fully_normalized: self.b.iter().all(|b| *b == q(1)),
        };
        for a in 0..nr {
            let na = rd.negative_of(a);
            for bb in 0..nr {
                let want = if bb == na { self.b[a] } else { q(0) };
                if self.killing[a][bb] != want {
                    rep.killing_pairing = false;
                }
            }
            let h: Vec<Q> = self.cartan_vector(&self.coroots[a]);
            let br = self.bracket(&self.unit::<Q>(a), &self.unit::<Q>(na));
            if br.iter().zip(&h).any(|(x, y)| *x != self.b[a] * *y) {
                rep.killing_pairing = false;
            }
            for j in 0..r {
                let hj = self.unit::<Q>(self.cartan_slot(j));
                let mut e = vec![q(0); r];
                e[j] = q(1);
                if self.killing_form(&h, &hj) != self.root_on_cartan(a, &e) {
                    rep.coroot_duality = false;
                }
            }
            for bb in 0..nr {
                if bb == na {
                    continue;
                }
                match rd.sum_of(a, bb) {
                    None => {
                        if !self.bracket_basis(a, bb).is_empty() {
                            rep.vanishing_brackets = false;
                        }
                    }
                    Some(s) => {
                        let n = self.n_coeff(a, bb).unwrap();
                        if n == q(0) || self.bracket_basis(a, bb).iter().any(|(k, _)| *k != s) {
                            rep.structure_constants_nonzero = false;
                        }
                        let (nega, negb) = (rd.negative_of(a), rd.negative_of(bb));
                        if self.n_coeff(nega, negb) != Some(-n) {
                            rep.negation_antisymmetry = false;
                        }
                        let n_neg = self.normalized_n(nega, negb).unwrap();
                        let c1 = self.normalized_n(negb, s);
                        let c2 = self.normalized_n(s, nega);
                        if c1 != Some(n_neg) {
                            rep.cyclic_first = false;
                        }
                        if c2.is_none() || c1 != c2 {
                            rep.cyclic_second = false;
                        }
                    }
                }
            }
        }
        rep
    }

    /// Exact `B` table rendered as `"p/q"` strings.
    pub fn killing_strings(&self) -> Vec<Vec<String>> {
        self.killing.iter().map(|r| r.iter().map(format_q).collect()).collect()
    }

    pub fn to_complex(&self, v: &[Q]) -> Vec<Cq> {
        v.iter().map(|x| Cq::real(*x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;

    #[test]
    fn sl2_normalization() {
        let bd = build_for_type("A1".parse().unwrap());
        let h = bd.cartan_slot(0);
        // Killing form of the Chevalley coroot.
        assert_eq!(bd.killing[h][h], q(8));
        assert_eq!(bd.coroots[0], vec![qr(1, 4)]);
        assert_eq!(bd.root_on_cartan(0, &bd.coroots[0]), qr(1, 2));
        assert_eq!(bd.b, vec![q(1), q(1)]);
        assert!(bd.normalization_report().fully_normalized);
    }

    #[test]
    fn trace_form_oracle_sl3() {
        // For sl(n) the Killing form is 2n·tr(XY).
        let bd = build_for_type("A2".parse().unwrap());
        for i in 0..bd.dim() {
            for j in 0..bd.dim() {
                let p = crate::linalg::mat_mul(&bd.matrices[i], &bd.matrices[j]);
                let tr: Q = (0..3).map(|k| p[k][k]).sum();
                assert_eq!(bd.killing[i][j], q(6) * tr);
            }
        }
    }

    #[test]
    fn a2_structure_constants_equal_magnitude() {
        let bd = build_for_type("A2".parse().unwrap());
        let rd = &bd.roots;
        let mut squares = Vec::new();
        for a in 0..rd.len() {
            for b in 0..rd.len() {
                if let Some(n) = bd.normalized_n(a, b) {
                    squares.push(n.square);
                }
            }
        }
        assert_eq!(squares.len(), 12);
        assert!(squares.iter().all(|s| *s == squares[0]));
        assert_eq!(squares[0], qr(1, 6));
    }

    #[test]
    fn ratio_form_for_non_square_killing_values() {
        let bd = build_for_type("A2".parse().unwrap());
        assert!(bd.b.iter().all(|b| *b == q(6)));
        assert!(!bd.normalization_report().fully_normalized);
        let c2 = build_for_type("C2".parse().unwrap());
        let mut bs: Vec<Q> = c2.b.clone();
        bs.sort();
        bs.dedup();
        assert_eq!(bs, vec![q(3), q(6)]);
    }

    #[test]
    fn identities_hold_on_small_types() {
        for ty in ["A1", "B2", "D2", "B3"] {
            let bd = build_for_type(ty.parse().unwrap());
            assert_eq!(bd.jacobi_violations(), 0, "{ty}");
            let rep = bd.normalization_report();
            assert!(rep.all_hold(), "{ty}: {rep:?}");
        }
    }
}
