//! Classical root systems in simple-root coordinates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, Q};
use crate::linalg::Matrix;

pub const MAX_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A | Family::B | Family::C => (1..=MAX_RANK).contains(&rank),
            Family::D => (2..=MAX_RANK).contains(&rank),
        };
        if ok {
            Ok(Self { family, rank })
        } else {
            Err(Error::UnsupportedType(format!("{family:?}{rank}")))
        }
    }

    /// Dimension of the Euclidean space holding the standard `ε` model.
    pub fn eps_dim(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            _ => self.rank,
        }
    }

    /// Simple roots in the standard `ε` coordinates.
    pub fn simple_roots_eps(&self) -> Vec<Vec<i64>> {
        let r = self.rank;
        let n = self.eps_dim();
        let diff = |i: usize, j: usize| {
            let mut v = vec![0; n];
            v[i] += 1;
            v[j] -= 1;
            v
        };
        match self.family {
            Family::A => (0..r).map(|i| diff(i, i + 1)).collect(),
            Family::B | Family::C => {
                let mut s: Vec<_> = (0..r - 1).map(|i| diff(i, i + 1)).collect();
                let mut last = vec![0; n];
                last[r - 1] = if self.family == Family::B { 1 } else { 2 };
                s.push(last);
                s
            }
            Family::D => {
                let mut s: Vec<_> = (0..r - 1).map(|i| diff(i, i + 1)).collect();
                let mut last = vec![0; n];
                last[r - 2] = 1;
                last[r - 1] = 1;
                s.push(last);
                s
            }
        }
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for CartanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::UnsupportedType(s.to_string());
        let mut chars = s.chars();
        let family = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('B') => Family::B,
            Some('C') => Family::C,
            Some('D') => Family::D,
            _ => return Err(bad()),
        };
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        CartanType::new(family, rank)
    }
}

impl Serialize for CartanType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CartanType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type RootCoords = Vec<i64>;

/// Root system with a fixed positive system.
///
/// Positive roots are ordered by height, ties broken by descending
/// lexicographic order of their simple-root coordinates, so the simple roots
/// come first as `α1, …, αr`. The negative roots follow in the same order.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub cartan_type: CartanType,
    pub roots: Vec<RootCoords>,
    pub positive: Vec<bool>,
    /// Inner products `(αi, αj)` of simple roots (integral in the `ε` model).
    pub gram: Matrix<Q>,
    /// Cartan matrix `pairing[i][j] = ⟨αi, αj^∨⟩ = 2(αi,αj)/(αj,αj)`.
    pub pairing: Matrix<Q>,
    index: HashMap<RootCoords, usize>,
}

pub fn build_root_system(cartan_type: CartanType) -> RootDatum {
    let simple_eps = cartan_type.simple_roots_eps();
    let r = cartan_type.rank;
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
    let gram: Matrix<Q> = (0..r)
        .map(|i| (0..r).map(|j| q(dot(&simple_eps[i], &simple_eps[j]) as i128)).collect())
        .collect();
    let pairing: Matrix<Q> = (0..r)
        .map(|i| (0..r).map(|j| gram[i][j] * q(2) / gram[j][j]).collect())
        .collect();

    // ⟨β, αi^∨⟩ for β in simple-root coordinates.
    let coroot_pairing = |beta: &[i64], i: usize| -> i64 {
        let v: Q = (0..r).map(|j| q(beta[j] as i128) * pairing[j][i]).sum();
        debug_assert!(v.is_integer());
        *v.numer() as i64
    };

    let unit = |i: usize| {
        let mut v = vec![0i64; r];
        v[i] = 1;
        v
    };
    let mut positive: Vec<RootCoords> = (0..r).map(unit).collect();
    let mut known: std::collections::HashSet<RootCoords> = positive.iter().cloned().collect();
    let mut frontier = positive.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for beta in &frontier {
            for i in 0..r {
                // α_i-string through β: p = largest k with β - kα_i a positive root.
                let mut p = 0;
                loop {
                    let mut c = beta.clone();
                    c[i] -= p + 1;
                    if known.contains(&c) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let qq = p - coroot_pairing(beta, i);
                if qq > 0 {
                    let mut c = beta.clone();
                    c[i] += 1;
                    if known.insert(c.clone()) {
                        next.push(c);
                    }
                }
            }
        }
        positive.extend(next.iter().cloned());
        frontier = next;
    }
    positive.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    let mut roots = positive.clone();
    roots.extend(positive.iter().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
    let np = positive.len();
    let flags = (0..roots.len()).map(|k| k < np).collect();
    let index = roots.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
    RootDatum { cartan_type, roots, positive: flags, gram, pairing, index }
}

impl RootDatum {
    pub fn rank(&self) -> usize {
        self.cartan_type.rank
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.roots.len() / 2
    }

    pub fn positive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        0..self.n_positive()
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    /// Index of `-α`.
    pub fn negative_of(&self, idx: usize) -> usize {
        let np = self.n_positive();
        if idx < np {
            idx + np
        } else {
            idx - np
        }
    }

    /// Index of `α + β`, if it is a root.
    pub fn sum_of(&self, a: usize, b: usize) -> Option<usize> {
        let s: Vec<i64> = self.roots[a].iter().zip(&self.roots[b]).map(|(x, y)| x + y).collect();
        self.index_of(&s)
    }

    pub fn height(&self, idx: usize) -> i64 {
        self.roots[idx].iter().sum()
    }

    pub fn simple_index(&self, i: usize) -> usize {
        debug_assert!(i < self.rank());
        i
    }

    /// `(α, β)` in the `ε` normalization.
    pub fn inner(&self, a: &[i64], b: &[i64]) -> Q {
        let r = self.rank();
        let mut s = q(0);
        for i in 0..r {
            for j in 0..r {
                if a[i] != 0 && b[j] != 0 {
                    s += q((a[i] * b[j]) as i128) * self.gram[i][j];
                }
            }
        }
        s
    }

    /// `⟨β, αi^∨⟩`, the value of `β` on the i-th simple coroot.
    pub fn coroot_value(&self, beta: &[i64], i: usize) -> Q {
        (0..self.rank()).map(|j| q(beta[j] as i128) * self.pairing[j][i]).sum()
    }

    /// Express a vector in `ε` coordinates as simple-root coordinates.
    pub fn from_eps(&self, v: &[i64]) -> Option<RootCoords> {
        let simple = self.cartan_type.simple_roots_eps();
        let r = self.rank();
        let n = self.cartan_type.eps_dim();
        let m: Matrix<Q> =
            (0..n).map(|c| (0..r).map(|i| q(simple[i][c] as i128)).collect()).collect();
        let rhs: Vec<Q> = v.iter().map(|&x| q(x as i128)).collect();
        let x = crate::linalg::solve(&m, &rhs)?;
        x.iter().map(|c| c.is_integer().then(|| *c.numer() as i64)).collect()
    }

    pub fn to_eps(&self, coords: &[i64]) -> Vec<i64> {
        let simple = self.cartan_type.simple_roots_eps();
        let n = self.cartan_type.eps_dim();
        (0..n).map(|c| coords.iter().zip(&simple).map(|(k, s)| k * s[c]).sum()).collect()
    }

    pub fn label(&self, idx: usize) -> String {
        let c = &self.roots[idx];
        let sign = if self.positive[idx] { "" } else { "-" };
        let body: Vec<String> = c
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 0)
            .map(|(i, &k)| {
                let k = k.abs();
                if k == 1 {
                    format!("a{}", i + 1)
                } else {
                    format!("{k}a{}", i + 1)
                }
            })
            .collect();
        format!("{sign}{}", body.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_closure(cartan_type: CartanType) -> usize {
        // Reflection closure of the simple roots under the Weyl group.
        let rd = build_root_system(cartan_type);
        let r = rd.rank();
        let mut set: std::collections::HashSet<RootCoords> =
            (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
        loop {
            let mut grown = false;
            let current: Vec<_> = set.iter().cloned().collect();
            for beta in &current {
                for i in 0..r {
                    let k = rd.coroot_value(beta, i);
                    let mut c = beta.clone();
                    c[i] -= *k.numer() as i64;
                    if set.insert(c) {
                        grown = true;
                    }
                }
            }
            if !grown {
                return set.len();
            }
        }
    }

    #[test]
    fn root_counts() {
        for (ty, n) in [("A1", 2), ("A2", 6), ("A3", 12), ("B2", 8), ("C2", 8), ("B3", 18), ("C4", 32), ("D4", 24), ("A4", 20)] {
            let rd = build_root_system(ty.parse().unwrap());
            assert_eq!(rd.len(), n, "{ty}");
            assert_eq!(brute_force_closure(ty.parse().unwrap()), n, "{ty}");
            assert_eq!(rd.n_positive() * 2, rd.len());
        }
    }

    #[test]
    fn a2_positive_roots() {
        let rd = build_root_system("A2".parse().unwrap());
        let pos: Vec<_> = rd.positive_indices().map(|k| rd.roots[k].clone()).collect();
        assert_eq!(pos, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn root_system_axioms() {
        for ty in ["A3", "B3", "C3", "D4", "B4"] {
            let rd = build_root_system(ty.parse().unwrap());
            for (k, a) in rd.roots.iter().enumerate() {
                let neg: Vec<i64> = a.iter().map(|x| -x).collect();
                assert_eq!(rd.index_of(&neg), Some(rd.negative_of(k)));
                let twice: Vec<i64> = a.iter().map(|x| 2 * x).collect();
                assert!(rd.index_of(&twice).is_none());
                // Positive roots have non-negative coordinates.
                assert_eq!(rd.positive[k], a.iter().all(|&x| x >= 0));
            }
        }
    }

    #[test]
    fn unsupported_types() {
        assert!(matches!("E6".parse::<CartanType>(), Err(Error::UnsupportedType(_))));
        assert!(matches!("A5".parse::<CartanType>(), Err(Error::UnsupportedType(_))));
        assert!(matches!("D1".parse::<CartanType>(), Err(Error::UnsupportedType(_))));
        assert!(matches!("A0".parse::<CartanType>(), Err(Error::UnsupportedType(_))));
    }

    #[test]
    fn eps_roundtrip() {
        let rd = build_root_system("C2".parse().unwrap());
        for r in &rd.roots {
            assert_eq!(rd.from_eps(&rd.to_eps(r)).as_ref(), Some(r));
        }
    }
}
