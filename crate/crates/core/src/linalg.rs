//! Exact linear algebra over [`Scalar`] fields.

use crate::exact::{sign_q, Scalar, Q};

pub type Matrix<F> = Vec<Vec<F>>;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<F: Scalar>(m: &mut Matrix<F>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = F::one() / m[r][c];
        for x in m[r].iter_mut() {
            *x = *x * inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in c..cols {
                    let t = m[r][j];
                    if !t.is_zero() {
                        m[i][j] = m[i][j] - f * t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Scalar>(rows: &[Vec<F>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace<F: Scalar>(m: &[Vec<F>], cols: usize) -> Vec<Vec<F>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![F::zero(); cols];
        v[free] = F::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[row][free];
        }
        basis.push(v);
    }
    basis
}

/// Some solution of `m x = rhs`, or `None` if inconsistent.
pub fn solve<F: Scalar>(m: &[Vec<F>], rhs: &[F]) -> Option<Vec<F>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Matrix<F> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let pivots = rref(&mut a);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![F::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = a[row][cols];
    }
    Some(x)
}

pub fn det<F: Scalar>(m: &[Vec<F>]) -> F {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = F::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return F::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d = d * a[c][c];
        let inv = F::one() / a[c][c];
        for i in c + 1..n {
            let f = a[i][c] * inv;
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let t = a[c][j];
                a[i][j] = a[i][j] - f * t;
            }
        }
    }
    d
}

pub fn mat_mul<F: Scalar>(a: &[Vec<F>], b: &[Vec<F>]) -> Matrix<F> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(F::zero(), |acc, k| {
                        if row[k].is_zero() {
                            acc
                        } else {
                            acc + row[k] * b[k][j]
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<F: Scalar>(a: &[Vec<F>], v: &[F]) -> Vec<F> {
    a.iter()
        .map(|row| {
            row.iter().zip(v).fold(F::zero(), |acc, (&x, &y)| {
                if x.is_zero() || y.is_zero() {
                    acc
                } else {
                    acc + x * y
                }
            })
        })
        .collect()
}

pub fn identity<F: Scalar>(n: usize) -> Matrix<F> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect())
        .collect()
}

pub fn transpose<F: Scalar>(a: &[Vec<F>]) -> Matrix<F> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn axpy<F: Scalar>(y: &mut [F], a: F, x: &[F]) {
    if a.is_zero() {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = *yi + a * xi;
        }
    }
}

pub fn scaled<F: Scalar>(a: F, x: &[F]) -> Vec<F> {
    x.iter().map(|&xi| a * xi).collect()
}

pub fn is_zero_vec<F: Scalar>(v: &[F]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Sylvester's criterion on a symmetric rational matrix.
/// Returns +1 (positive definite), -1 (negative definite) or 0 (neither).
pub fn definiteness(m: &[Vec<Q>]) -> i8 {
    let n = m.len();
    if n == 0 {
        return 0;
    }
    let mut pos = true;
    let mut neg = true;
    for k in 1..=n {
        let minor: Matrix<Q> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
        let s = sign_q(&det(&minor));
        if s != 1 {
            pos = false;
        }
        let want = if k % 2 == 0 { 1 } else { -1 };
        if s != want {
            neg = false;
        }
    }
    if pos {
        1
    } else if neg {
        -1
    } else {
        0
    }
}

/// A linear subspace of `F^n`, kept with a reduced echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace<F: Scalar> {
    ambient: usize,
    echelon: Matrix<F>,
    pivots: Vec<usize>,
}

impl<F: Scalar> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Self { ambient, echelon: Vec::new(), pivots: Vec::new() }
    }

    pub fn span(ambient: usize, vectors: &[Vec<F>]) -> Self {
        let mut m: Matrix<F> = vectors.to_vec();
        let pivots = rref(&mut m);
        m.truncate(pivots.len());
        Self { ambient, echelon: m, pivots }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, &identity(ambient))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.echelon.len()
    }

    pub fn basis(&self) -> &[Vec<F>] {
        &self.echelon
    }

    /// Component of `v` left after eliminating against the echelon basis.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut r = v.to_vec();
        for (row, &pc) in self.echelon.iter().zip(&self.pivots) {
            let f = r[pc];
            if !f.is_zero() {
                axpy(&mut r, -f, row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[F]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    pub fn contains_space(&self, other: &Subspace<F>) -> bool {
        other.basis().iter().all(|v| self.contains(v))
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, v: &[F]) -> bool {
        let r = self.reduce(v);
        if is_zero_vec(&r) {
            return false;
        }
        let mut rows = std::mem::take(&mut self.echelon);
        rows.push(r);
        *self = Self::span(self.ambient, &rows);
        true
    }

    pub fn sum(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut rows = self.echelon.clone();
        rows.extend(other.echelon.iter().cloned());
        Self::span(self.ambient, &rows)
    }

    pub fn intersection(&self, other: &Subspace<F>) -> Subspace<F> {
        // Solve a·A = b·B for coefficient vectors (a, b).
        let a = &self.echelon;
        let b = &other.echelon;
        if a.is_empty() || b.is_empty() {
            return Self::zero(self.ambient);
        }
        let unknowns = a.len() + b.len();
        let eqs: Matrix<F> = (0..self.ambient)
            .map(|c| {
                a.iter()
                    .map(|r| r[c])
                    .chain(b.iter().map(|r| -r[c]))
                    .collect::<Vec<F>>()
            })
            .collect();
        let ns = nullspace(&eqs, unknowns);
        let vecs: Vec<Vec<F>> = ns
            .iter()
            .map(|coef| {
                let mut v = vec![F::zero(); self.ambient];
                for (k, row) in a.iter().enumerate() {
                    axpy(&mut v, coef[k], row);
                }
                v
            })
            .collect();
        Self::span(self.ambient, &vecs)
    }

    pub fn same_as(&self, other: &Subspace<F>) -> bool {
        self.dim() == other.dim() && self.contains_space(other)
    }

    /// Coordinates of `v` in the echelon basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&pc| v[pc]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qr};

    fn m(rows: &[&[i128]]) -> Matrix<Q> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn det_and_solve() {
        let a = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(det(&a), q(5));
        let x = solve(&a, &[q(3), q(4)]).unwrap();
        assert_eq!(x, vec![q(1), q(1)]);
        let sing = m(&[&[1, 2], &[2, 4]]);
        assert!(solve(&sing, &[q(1), q(0)]).is_none());
        assert_eq!(nullspace(&sing, 2), vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn sylvester() {
        assert_eq!(definiteness(&m(&[&[2, -1], &[-1, 2]])), 1);
        assert_eq!(definiteness(&m(&[&[-2, 1], &[1, -2]])), -1);
        assert_eq!(definiteness(&m(&[&[1, 0], &[0, -1]])), 0);
    }

    #[test]
    fn subspace_ops() {
        let s = Subspace::span(3, &m(&[&[1, 1, 0], &[0, 1, 1]]));
        let t = Subspace::span(3, &m(&[&[1, 0, 0], &[0, 0, 1]]));
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[q(1), q(2), q(1)]));
        let i = s.intersection(&t);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[q(1), q(0), q(-1)]));
        assert_eq!(s.sum(&t).dim(), 3);
        assert_eq!(s.coordinates(&[q(2), q(3), q(1)]), Some(vec![q(2), q(3)]));
        assert!(s.coordinates(&[qr(1, 2), q(0), q(0)]).is_none());
    }
}
