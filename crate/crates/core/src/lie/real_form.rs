//! Real forms of inner type: conjugation `σ` from compact/noncompact root
//! labels, Cartan involution `θ`, and the `k ⊕ q` decomposition.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, Cq, Q};
use crate::lie::basis::BasisData;
use crate::lie::roots::RootDatum;
use crate::linalg::{definiteness, identity, mat_mul, Matrix};

/// `ε_α` for every root (`-1` compact, `+1` noncompact), with `ε_{-α} = ε_α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpsilonLabels(pub Vec<i8>);

impl EpsilonLabels {
    /// Labels given on the positive roots, extended to all roots.
    pub fn from_positive(rd: &RootDatum, positive: &[i8]) -> Result<Self> {
        if positive.len() != rd.n_positive() || positive.iter().any(|e| e.abs() != 1) {
            return Err(Error::InvalidRealForm(format!(
                "expected {} labels in {{-1, +1}}, got {positive:?}",
                rd.n_positive()
            )));
        }
        let mut all = positive.to_vec();
        all.extend_from_slice(positive);
        Ok(Self(all))
    }

    /// Labels induced by an involution `θ = ±1` on simple roots: a root with
    /// coordinates `c` has `θ_α = ∏ θ_i^{c_i}` and `ε_α = -θ_α`.
    pub fn from_simple(rd: &RootDatum, simple: &[i8]) -> Result<Self> {
        if simple.len() != rd.rank() || simple.iter().any(|e| e.abs() != 1) {
            return Err(Error::InvalidRealForm(format!(
                "expected {} simple labels in {{-1, +1}}, got {simple:?}",
                rd.rank()
            )));
        }
        let positive: Vec<i8> = rd
            .positive_indices()
            .map(|k| {
                let theta: i8 = rd.roots[k]
                    .iter()
                    .zip(simple)
                    .map(|(&c, &e)| if c.rem_euclid(2) == 1 { -e } else { 1 })
                    .product();
                -theta
            })
            .collect();
        Self::from_positive(rd, &positive)
    }

    pub fn is_compact(&self, root: usize) -> bool {
        self.0[root] == -1
    }
}

#[derive(Clone, Debug)]
pub struct RealFormData {
    pub basis: Arc<BasisData>,
    pub eps: EpsilonLabels,
    /// `σ(v) = sigma · conj(v)`.
    pub sigma: Matrix<Q>,
    /// Conjugation of the compact real form, same convention as `sigma`.
    pub compact_conjugation: Matrix<Q>,
    /// Cartan involution (complex linear).
    pub theta: Matrix<Q>,
    pub t_basis: Vec<Vec<Cq>>,
    pub k_basis: Vec<Vec<Cq>>,
    pub q_basis: Vec<Vec<Cq>>,
}

fn conj_apply(m: &Matrix<Q>, v: &[Cq]) -> Vec<Cq> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(Cq::default(), |acc, (a, x)| {
                if *a == q(0) {
                    acc
                } else {
                    acc + x.conj().scale(*a)
                }
            })
        })
        .collect()
}

fn lin_apply(m: &Matrix<Q>, v: &[Cq]) -> Vec<Cq> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(Cq::default(), |acc, (a, x)| {
                if *a == q(0) {
                    acc
                } else {
                    acc + x.scale(*a)
                }
            })
        })
        .collect()
}

fn conjugation_matrix(bd: &BasisData, eps: &[i8]) -> Matrix<Q> {
    let dim = bd.dim();
    let mut s = vec![vec![q(0); dim]; dim];
    for a in 0..bd.n_roots() {
        let na = bd.roots.negative_of(a);
        s[bd.root_slot(na)][bd.root_slot(a)] = q(eps[a] as i128);
    }
    for i in 0..bd.rank() {
        let c = bd.cartan_slot(i);
        s[c][c] = q(-1);
    }
    s
}

/// Assemble `σ`, `θ` and the `k`/`q` bases from root labels, validating every
/// structural property.
pub fn apply_real_form(bd: &Arc<BasisData>, eps: &EpsilonLabels) -> Result<RealFormData> {
    let rd = &bd.roots;
    if eps.0.len() != rd.len() {
        return Err(Error::InvalidRealForm("label count does not match the root system".into()));
    }
    let dim = bd.dim();
    let sigma = conjugation_matrix(bd, &eps.0);
    let compact = conjugation_matrix(bd, &vec![-1; rd.len()]);
    let theta = mat_mul(&compact, &sigma);
    let id: Matrix<Q> = identity(dim);
    if mat_mul(&sigma, &sigma) != id || mat_mul(&theta, &theta) != id {
        return Err(Error::InvalidRealForm("σ or θ is not an involution".into()));
    }
    if mat_mul(&sigma, &theta) != mat_mul(&theta, &sigma) {
        return Err(Error::InvalidRealForm("σ and θ do not commute".into()));
    }
    // σ must be an antilinear automorphism; on the real basis this is
    // σ[x,y] = [σx,σy].
    for i in 0..dim {
        for j in i + 1..dim {
            let (x, y) = (bd.unit::<Cq>(i), bd.unit::<Cq>(j));
            let lhs = conj_apply(&sigma, &bd.bracket(&x, &y));
            let rhs = bd.bracket(&conj_apply(&sigma, &x), &conj_apply(&sigma, &y));
            if lhs != rhs {
                return Err(Error::InvalidRealForm(format!(
                    "σ is not an automorphism on ({}, {}): labels violate ε_(α+β) = -ε_α ε_β",
                    i, j
                )));
            }
        }
    }

    let i_unit = Cq::i();
    let t_basis: Vec<Vec<Cq>> = (0..bd.rank())
        .map(|i| {
            let mut v = bd.unit::<Cq>(bd.cartan_slot(i));
            v[bd.cartan_slot(i)] = i_unit;
            v
        })
        .collect();
    let mut k_basis = t_basis.clone();
    let mut q_basis = Vec::new();
    for a in rd.positive_indices() {
        let na = rd.negative_of(a);
        let ea = bd.unit::<Cq>(bd.root_slot(a));
        let ena = bd.unit::<Cq>(bd.root_slot(na));
        let plus: Vec<Cq> = ea.iter().zip(&ena).map(|(x, y)| *x + *y).collect();
        let minus: Vec<Cq> = ea.iter().zip(&ena).map(|(x, y)| *x - *y).collect();
        let times_i = |v: &[Cq]| v.iter().map(|x| *x * i_unit).collect::<Vec<_>>();
        if eps.is_compact(a) {
            k_basis.push(minus.clone());
            k_basis.push(times_i(&plus));
        } else {
            q_basis.push(plus.clone());
            q_basis.push(times_i(&minus));
        }
    }

    let rf = RealFormData {
        basis: Arc::clone(bd),
        eps: eps.clone(),
        sigma,
        compact_conjugation: compact,
        theta,
        t_basis,
        k_basis,
        q_basis,
    };
    for v in rf.k_basis.iter().chain(&rf.q_basis) {
        if rf.sigma_apply(v) != *v {
            return Err(Error::InvalidRealForm("real basis vector not fixed by σ".into()));
        }
    }
    if !rf.k_basis.is_empty() && rf.killing_definiteness(&rf.k_basis)? != -1 {
        return Err(Error::InvalidRealForm("B is not negative definite on k".into()));
    }
    if !rf.q_basis.is_empty() && rf.killing_definiteness(&rf.q_basis)? != 1 {
        return Err(Error::InvalidRealForm("B is not positive definite on q".into()));
    }
    Ok(rf)
}

impl RealFormData {
    pub fn sigma_apply(&self, v: &[Cq]) -> Vec<Cq> {
        conj_apply(&self.sigma, v)
    }

    pub fn compact_apply(&self, v: &[Cq]) -> Vec<Cq> {
        conj_apply(&self.compact_conjugation, v)
    }

    pub fn theta_apply(&self, v: &[Cq]) -> Vec<Cq> {
        lin_apply(&self.theta, v)
    }

    /// Gram matrix of `B` on real vectors (values must be real).
    pub fn killing_gram(&self, vs: &[Vec<Cq>]) -> Result<Matrix<Q>> {
        let bd = &self.basis;
        vs.iter()
            .map(|x| {
                vs.iter()
                    .map(|y| {
                        let v = bd.killing_form(x, y);
                        if v.is_real() {
                            Ok(v.re)
                        } else {
                            Err(Error::InvalidRealForm("Killing form not real on the real form".into()))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn killing_definiteness(&self, vs: &[Vec<Cq>]) -> Result<i8> {
        Ok(definiteness(&self.killing_gram(vs)?))
    }

    /// Basis of the real form `g` (σ-fixed), `k` first.
    pub fn real_basis(&self) -> Vec<Vec<Cq>> {
        self.k_basis.iter().chain(&self.q_basis).cloned().collect()
    }

    /// Real form is compact (`q = 0`).
    pub fn is_compact(&self) -> bool {
        self.q_basis.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::basis::build_for_type;

    fn labels(ty: &str, simple: &[i8]) -> (Arc<BasisData>, EpsilonLabels) {
        let bd = Arc::new(build_for_type(ty.parse().unwrap()));
        let eps = EpsilonLabels::from_simple(&bd.roots, simple).unwrap();
        (bd, eps)
    }

    #[test]
    fn su11_and_su2() {
        let (bd, eps) = labels("A1", &[1]);
        let rf = apply_real_form(&bd, &eps).unwrap();
        assert_eq!(rf.q_basis.len(), 2);
        assert_eq!(rf.killing_definiteness(&rf.q_basis).unwrap(), 1);
        let (bd, eps) = labels("A1", &[-1]);
        let rf = apply_real_form(&bd, &eps).unwrap();
        assert!(rf.is_compact());
        assert_eq!(rf.k_basis.len(), 3);
    }

    #[test]
    fn su21_labels_and_involutions() {
        let (bd, eps) = labels("A2", &[1, 1]);
        assert_eq!(eps.0[..3], [1, 1, -1]);
        let rf = apply_real_form(&bd, &eps).unwrap();
        for a in 0..bd.n_roots() {
            let e = bd.unit::<Cq>(a);
            let mut want = bd.unit::<Cq>(bd.roots.negative_of(a));
            for x in want.iter_mut() {
                *x = x.scale(q(eps.0[a] as i128));
            }
            assert_eq!(rf.sigma_apply(&e), want);
        }
        assert_eq!(rf.k_basis.len(), 4);
        assert_eq!(rf.q_basis.len(), 4);
    }

    #[test]
    fn inconsistent_labels_rejected() {
        let bd = Arc::new(build_for_type("A2".parse().unwrap()));
        let eps = EpsilonLabels::from_positive(&bd.roots, &[1, 1, 1]).unwrap();
        assert!(matches!(apply_real_form(&bd, &eps), Err(Error::InvalidRealForm(_))));
    }
}
