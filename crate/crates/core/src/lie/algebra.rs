//! Finite-dimensional Lie algebras given by exact structure constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, QStr, Scalar, Q};
use crate::linalg::{Matrix, Subspace};

pub type SparseVec = Vec<(usize, Q)>;

/// Lie algebra over ℚ (used for both real forms and, after extension of
/// scalars, their complexifications).
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    brackets: Vec<Vec<SparseVec>>,
    pub names: Vec<String>,
}

/// Text form: `[[i, j], [[k, "c"], ...]]` entries for `i < j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieAlgebraSpec {
    pub names: Vec<String>,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub pair: [usize; 2],
    pub value: Vec<(usize, QStr)>,
}

impl LieAlgebra {
    pub fn from_table(brackets: Vec<Vec<SparseVec>>, names: Vec<String>) -> Self {
        let dim = brackets.len();
        Self { dim, brackets, names }
    }

    /// Build from the nonzero brackets `[b_i, b_j]`, `i < j`; validates Jacobi.
    pub fn from_entries(names: Vec<String>, entries: &[((usize, usize), SparseVec)]) -> Result<Self> {
        let dim = names.len();
        let mut brackets = vec![vec![SparseVec::new(); dim]; dim];
        for ((i, j), v) in entries {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim || i == j || v.iter().any(|(k, _)| *k >= dim) {
                return Err(Error::Fixture(format!("bad bracket entry [{i}, {j}]")));
            }
            let v: SparseVec = v.iter().copied().filter(|(_, c)| *c != q(0)).collect();
            brackets[j][i] = v.iter().map(|&(k, c)| (k, -c)).collect();
            brackets[i][j] = v;
        }
        let la = Self { dim, brackets, names };
        if la.jacobi_violations() != 0 {
            return Err(Error::Fixture("structure constants violate the Jacobi identity".into()));
        }
        Ok(la)
    }

    pub fn from_spec(spec: &LieAlgebraSpec) -> Result<Self> {
        let entries: Vec<_> = spec
            .brackets
            .iter()
            .map(|e| ((e.pair[0], e.pair[1]), e.value.iter().map(|(k, c)| (*k, c.0)).collect()))
            .collect();
        Self::from_entries(spec.names.clone(), &entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.brackets[i][j]
    }

    pub fn unit<F: Scalar>(&self, slot: usize) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim];
        v[slot] = F::one();
        v
    }

    pub fn bracket<F: Scalar + From<Q>>(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let entries = &self.brackets[i][j];
                if entries.is_empty() {
                    continue;
                }
                let c = *xi * *yj;
                for &(k, v) in entries {
                    out[k] = out[k] + c * F::from(v);
                }
            }
        }
        out
    }

    /// Matrix of `ad x` (column `j` is `[x, b_j]`).
    pub fn ad_matrix<F: Scalar + From<Q>>(&self, x: &[F]) -> Matrix<F> {
        let mut m = vec![vec![F::zero(); self.dim]; self.dim];
        for col in 0..self.dim {
            let img = self.bracket(x, &self.unit::<F>(col));
            for (row, v) in img.into_iter().enumerate() {
                m[row][col] = v;
            }
        }
        m
    }

    /// `B(b_i, b_j) = tr(ad b_i ∘ ad b_j)`.
    pub fn killing_matrix(&self) -> Matrix<Q> {
        let dim = self.dim;
        let lookup = |i: usize, j: usize, k: usize| -> Q {
            self.brackets[i][j].iter().find(|(s, _)| *s == k).map_or(q(0), |(_, v)| *v)
        };
        let mut b = vec![vec![q(0); dim]; dim];
        for i in 0..dim {
            for j in i..dim {
                let mut s = q(0);
                for k in 0..dim {
                    for &(l, c) in &self.brackets[i][k] {
                        let d = lookup(j, l, k);
                        if d != q(0) {
                            s += c * d;
                        }
                    }
                }
                b[i][j] = s;
                b[j][i] = s;
            }
        }
        b
    }

    pub fn jacobi_violations(&self) -> usize {
        let dim = self.dim;
        let mut bad = 0;
        for i in 0..dim {
            for j in i + 1..dim {
                for k in j + 1..dim {
                    let (x, y, z) = (self.unit::<Q>(i), self.unit::<Q>(j), self.unit::<Q>(k));
                    let t1 = self.bracket(&self.bracket(&x, &y), &z);
                    let t2 = self.bracket(&self.bracket(&y, &z), &x);
                    let t3 = self.bracket(&self.bracket(&z, &x), &y);
                    if t1.iter().zip(&t2).zip(&t3).any(|((a, b), c)| *a + *b + *c != q(0)) {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    /// Span of all `[x, y]`, `x ∈ a`, `y ∈ b`.
    pub fn bracket_span<F: Scalar + From<Q>>(&self, a: &[Vec<F>], b: &[Vec<F>]) -> Subspace<F> {
        let vs: Vec<Vec<F>> =
            a.iter().flat_map(|x| b.iter().map(move |y| self.bracket(x, y))).collect();
        Subspace::span(self.dim, &vs)
    }

    /// Is the span of `vs` closed under the bracket?
    pub fn is_subalgebra<F: Scalar + From<Q>>(&self, vs: &[Vec<F>]) -> bool {
        let s = Subspace::span(self.dim, vs);
        s.contains_space(&self.bracket_span(s.basis(), s.basis()))
    }

    /// Is the span of `vs` an ideal?
    pub fn is_ideal<F: Scalar + From<Q>>(&self, vs: &[Vec<F>]) -> bool {
        let s = Subspace::span(self.dim, vs);
        let all: Vec<Vec<F>> = (0..self.dim).map(|i| self.unit::<F>(i)).collect();
        s.contains_space(&self.bracket_span(&all, s.basis()))
    }

    pub fn to_spec(&self) -> LieAlgebraSpec {
        let mut brackets = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                if !self.brackets[i][j].is_empty() {
                    brackets.push(BracketEntry {
                        pair: [i, j],
                        value: self.brackets[i][j].iter().map(|&(k, c)| (k, QStr(c))).collect(),
                    });
                }
            }
        }
        LieAlgebraSpec { names: self.names.clone(), brackets }
    }
}
