//! Polynomial holomorphic vector fields and distributions on charts of `ℂⁿ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, Cq};
use crate::grading::BracketWord;

pub type C64 = Complex64;

/// Polynomial in `n` complex variables with Gaussian rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Cq>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Cq) -> Self {
        let mut p = Self::zero(n);
        p.add_term(c, vec![0; n]);
        p
    }

    /// The coordinate function `z_k`.
    pub fn var(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        let mut p = Self::zero(n);
        p.add_term(Cq::real(q(1)), e);
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, c: Cq, e: Vec<u32>) {
        assert_eq!(e.len(), self.n);
        let entry = self.terms.entry(e).or_default();
        *entry += c;
        if *entry == Cq::default() {
            self.terms.retain(|_, v| *v != Cq::default());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Cq)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant value if the polynomial has no nonconstant terms.
    pub fn as_constant(&self) -> Option<Cq> {
        match self.terms.len() {
            0 => Some(Cq::default()),
            1 => self.terms.get(&vec![0; self.n]).copied(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*c, e.clone());
        }
        r
    }

    pub fn scale(&self, k: Cq) -> Self {
        let mut r = Self::zero(self.n);
        for (e, c) in &self.terms {
            r.add_term(*c * k, e.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-Cq::real(q(1))))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(*c1 * *c2, e1.iter().zip(e2).map(|(a, b)| a + b).collect());
            }
        }
        r
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut r = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                r.add_term(c.scale(q(e[k] as i128)), e2);
            }
        }
        r
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(z).fold(c.to_c64(), |acc, (&k, zi)| if k == 0 { acc } else { acc * zi.powu(k) })
            })
            .sum()
    }

    pub fn eval_exact(&self, z: &[Cq]) -> Cq {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(z).fold(*c, |acc, (&k, zi)| (0..k).fold(acc, |a, _| a * *zi))
            })
            .fold(Cq::default(), |a, b| a + b)
    }
}

/// Holomorphic vector field `Σ X^k ∂_{z_k}` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField(pub Vec<Polynomial>);

impl VectorField {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, z: &[C64]) -> Vec<C64> {
        self.0.iter().map(|p| p.eval(z)).collect()
    }

    pub fn scale(&self, k: Cq) -> Self {
        VectorField(self.0.iter().map(|p| p.scale(k)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|p| p.is_zero())
    }

    /// `[X, Y]^k = Σ_j X^j ∂_j Y^k - Y^j ∂_j X^k`.
    pub fn bracket(&self, o: &Self) -> Self {
        let n = self.dim();
        let comp = |k: usize| {
            (0..n).fold(Polynomial::zero(n), |acc, j| {
                acc.add(&self.0[j].mul(&o.0[k].derivative(j))).sub(&o.0[j].mul(&self.0[k].derivative(j)))
            })
        };
        VectorField((0..n).map(comp).collect())
    }

    /// Field for a bracket word `[X_{w0}, [X_{w1}, … X_{wn}]]`.
    pub fn from_word(frame: &[VectorField], word: &[usize]) -> Self {
        let (last, rest) = word.split_last().expect("nonempty word");
        rest.iter().rev().fold(frame[*last].clone(), |acc, &i| frame[i].bracket(&acc))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChartDomain {
    /// All of `ℂⁿ`; the box only bounds sampling.
    #[default]
    Entire,
    /// The open polydisc of radius `box_radius`.
    Polydisc,
}

#[derive(Clone, Debug)]
pub struct ChartDistribution {
    pub name: String,
    pub n: usize,
    pub frame: Vec<VectorField>,
    /// Bracket words completing the frame to a basis, with their fields.
    pub completion: Vec<(BracketWord, VectorField)>,
    pub box_radius: f64,
    pub domain: ChartDomain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: Cq,
    pub e: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub components: Vec<Vec<TermSpec>>,
}

/// Text form of a [`ChartDistribution`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    #[serde(default)]
    pub name: String,
    pub dim: usize,
    pub box_radius: f64,
    #[serde(default)]
    pub domain: ChartDomain,
    pub frame: Vec<FieldSpec>,
    #[serde(default)]
    pub completion: Vec<BracketWord>,
}

fn field_from_spec(n: usize, f: &FieldSpec) -> Result<VectorField> {
    if f.components.len() != n {
        return Err(Error::Fixture(format!("field has {} components, expected {n}", f.components.len())));
    }
    let comps = f
        .components
        .iter()
        .map(|terms| {
            let mut p = Polynomial::zero(n);
            for t in terms {
                if t.e.len() != n {
                    return Err(Error::Fixture(format!("exponent {:?} has wrong length", t.e)));
                }
                p.add_term(t.c, t.e.clone());
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;
    Ok(VectorField(comps))
}

fn field_to_spec(f: &VectorField) -> FieldSpec {
    FieldSpec {
        components: f
            .0
            .iter()
            .map(|p| p.terms().map(|(e, c)| TermSpec { c: *c, e: e.clone() }).collect())
            .collect(),
    }
}

impl ChartDistribution {
    pub fn new(
        name: impl Into<String>,
        frame: Vec<VectorField>,
        completion: Vec<BracketWord>,
        box_radius: f64,
        domain: ChartDomain,
    ) -> Result<Self> {
        let n = frame.first().map_or(0, |f| f.dim());
        if n == 0 || frame.iter().any(|f| f.dim() != n) {
            return Err(Error::Fixture("frame fields must share a positive dimension".into()));
        }
        if frame.len() > n {
            return Err(Error::Fixture("rank exceeds the chart dimension".into()));
        }
        if !(box_radius > 0.0 && box_radius.is_finite()) {
            return Err(Error::Fixture("box radius must be positive".into()));
        }
        let mut comp = Vec::new();
        for w in completion {
            if w.is_empty() || w.iter().any(|&i| i >= frame.len()) {
                return Err(Error::Fixture(format!("bad completion word {w:?}")));
            }
            let f = VectorField::from_word(&frame, &w);
            comp.push((w, f));
        }
        if frame.len() + comp.len() > n {
            return Err(Error::Fixture("completion has too many fields".into()));
        }
        Ok(Self { name: name.into(), n, frame, completion: comp, box_radius, domain })
    }

    pub fn from_spec(s: &ChartSpec) -> Result<Self> {
        let frame = s.frame.iter().map(|f| field_from_spec(s.dim, f)).collect::<Result<Vec<_>>>()?;
        Self::new(s.name.clone(), frame, s.completion.clone(), s.box_radius, s.domain)
    }

    pub fn to_spec(&self) -> ChartSpec {
        ChartSpec {
            name: self.name.clone(),
            dim: self.n,
            box_radius: self.box_radius,
            domain: self.domain,
            frame: self.frame.iter().map(field_to_spec).collect(),
            completion: self.completion.iter().map(|(w, _)| w.clone()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn is_complete(&self) -> bool {
        self.frame.len() + self.completion.len() == self.n
    }

    /// Frame fields followed by completion fields.
    pub fn full_frame(&self) -> Vec<&VectorField> {
        self.frame.iter().chain(self.completion.iter().map(|(_, f)| f)).collect()
    }

    /// Same chart with the frame restricted to the given indices.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let frame = keep.iter().map(|&i| self.frame[i].clone()).collect();
        Self::new(self.name.clone(), frame, Vec::new(), self.box_radius, self.domain)
    }

    pub fn in_domain(&self, z: &[C64]) -> bool {
        match self.domain {
            ChartDomain::Entire => true,
            ChartDomain::Polydisc => z.iter().all(|c| c.norm() < self.box_radius),
        }
    }

    /// Frame values at `z` as columns.
    pub fn frame_matrix(&self, z: &[C64]) -> Vec<Vec<C64>> {
        let cols: Vec<Vec<C64>> = self.frame.iter().map(|f| f.eval(z)).collect();
        (0..self.n).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    /// Grid of sample points: `per_axis` points on `[-R, R]` for each real
    /// coordinate (capped to keep the grid small).
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<C64>> {
        let dims = 2 * self.n;
        let per = per_axis.max(2);
        let total = per.pow(dims as u32).min(20_000);
        let r = match self.domain {
            ChartDomain::Entire => self.box_radius,
            ChartDomain::Polydisc => self.box_radius * 0.95 / std::f64::consts::SQRT_2,
        };
        (0..total)
            .map(|mut idx| {
                let coords: Vec<f64> = (0..dims)
                    .map(|_| {
                        let k = idx % per;
                        idx /= per;
                        -r + 2.0 * r * k as f64 / (per - 1) as f64
                    })
                    .collect();
                (0..self.n).map(|i| C64::new(coords[2 * i], coords[2 * i + 1])).collect()
            })
            .collect()
    }

    /// Smallest depth at which brackets of the frame evaluated at `x` span
    /// `ℂⁿ` (numerical rank with relative threshold), with the words used.
    pub fn bracket_generating_at(&self, x: &[C64], max_depth: usize) -> Option<(usize, Vec<BracketWord>)> {
        let d = self.rank();
        let mut words: Vec<(BracketWord, VectorField)> =
            (0..d).map(|i| (vec![i], self.frame[i].clone())).collect();
        let mut basis: Vec<Vec<C64>> = Vec::new();
        let mut used = Vec::new();
        let mut layer = words.clone();
        for depth in 1..=max_depth {
            if depth > 1 {
                let mut next = Vec::new();
                for (w, f) in &layer {
                    for i in 0..d {
                        let mut nw = vec![i];
                        nw.extend_from_slice(w);
                        next.push((nw, self.frame[i].bracket(f)));
                    }
                }
                layer = next;
                words.extend(layer.iter().cloned());
            }
            for (w, f) in &layer {
                if insert_numeric(&mut basis, f.eval(x)) {
                    used.push(w.clone());
                }
            }
            if basis.len() == self.n {
                return Some((depth, used));
            }
        }
        None
    }
}

/// Gram–Schmidt insertion with a relative threshold.
pub(crate) fn insert_numeric(basis: &mut Vec<Vec<C64>>, v: Vec<C64>) -> bool {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    let mut r = v;
    for b in basis.iter() {
        let p: C64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= p * bi;
        }
    }
    let n = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n <= 1e-9 * scale {
        return false;
    }
    basis.push(r.into_iter().map(|c| c / n).collect());
    true
}

/// Heisenberg frame `X₁ = ∂₁`, `X₂ = ∂₂ + z₁∂₃` with completion `[X₁, X₂] = ∂₃`.
pub fn heisenberg(box_radius: f64) -> ChartDistribution {
    let n = 3;
    let one = Polynomial::constant(n, Cq::real(q(1)));
    let x1 = VectorField(vec![one.clone(), Polynomial::zero(n), Polynomial::zero(n)]);
    let x2 = VectorField(vec![Polynomial::zero(n), one, Polynomial::var(n, 0)]);
    ChartDistribution::new("heisenberg", vec![x1, x2], vec![vec![0, 1]], box_radius, ChartDomain::Entire)
        .expect("valid fixture")
}

/// Unit disc with its full tangent frame `∂_z`.
pub fn unit_disc() -> ChartDistribution {
    let x = VectorField(vec![Polynomial::constant(1, Cq::real(q(1)))]);
    ChartDistribution::new("disc", vec![x], Vec::new(), 1.0, ChartDomain::Polydisc).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_bracket() {
        let h = heisenberg(1.0);
        let b = h.frame[0].bracket(&h.frame[1]);
        assert_eq!(b.0[2].as_constant(), Some(Cq::real(q(1))));
        assert!(b.0[0].is_zero() && b.0[1].is_zero());
        assert!(h.is_complete());
        let z = vec![C64::new(0.3, 0.1); 3];
        let (depth, words) = h.bracket_generating_at(&z, 3).unwrap();
        assert_eq!(depth, 2);
        assert_eq!(words.len(), 3);
    }

    #[test]
    fn polynomial_ops() {
        let z0 = Polynomial::var(2, 0);
        let z1 = Polynomial::var(2, 1);
        let p = z0.mul(&z0).add(&z1.scale(Cq::i()));
        assert_eq!(p.degree(), 2);
        assert_eq!(p.derivative(0), z0.scale(Cq::real(q(2))));
        let v = p.eval(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(v, C64::new(4.0, 1.0));
        assert_eq!(p.eval_exact(&[Cq::real(q(2)), Cq::real(q(1))]), Cq::new(q(4), q(1)));
    }

    #[test]
    fn spec_roundtrip() {
        let h = heisenberg(2.0);
        let text = toml::to_string(&h.to_spec()).unwrap();
        let back = ChartDistribution::from_spec(&toml::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.frame, h.frame);
        assert_eq!(back.completion, h.completion);
    }
}
