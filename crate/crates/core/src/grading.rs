//! Gradings `gℂ = g_{-k} ⊕ … ⊕ g_k` by a Cartan element, the superhorizontal
//! piece `g_{-1}`, bracket generation, and graded bracket laws.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, Cq, Q};
use crate::lie::{BasisData, LieAlgebra, RealFormData, RootDatum};
use crate::linalg::{solve, Subspace};

/// `T` in coordinates over the simple coroots `H_1, …, H_r`, with
/// `α_i(T) = 0` for `i ∈ v_simple` and `1` otherwise.
pub fn grading_element(rd: &RootDatum, v_simple: &[usize]) -> Result<Vec<Q>> {
    let r = rd.rank();
    if let Some(bad) = v_simple.iter().find(|&&i| i >= r) {
        return Err(Error::DomainError(format!("simple root index {bad} out of range (rank {r})")));
    }
    let a: Vec<Vec<Q>> = (0..r)
        .map(|i| (0..r).map(|j| rd.coroot_value(&rd.roots[i], j)).collect())
        .collect();
    let rhs: Vec<Q> = (0..r).map(|i| if v_simple.contains(&i) { q(0) } else { q(1) }).collect();
    Ok(solve(&a, &rhs).expect("Cartan matrix is invertible"))
}

#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    pub algebra: Arc<LieAlgebra>,
    /// Present when the grading comes from a Cartan element of a root basis.
    pub grading_element: Option<Vec<Q>>,
    /// Level of every root (root-basis gradings only).
    pub root_levels: Option<Vec<i64>>,
    /// Roots of `vℂ = g_0` (root-basis gradings only).
    pub v_roots: Vec<usize>,
    min_level: i64,
    levels: Vec<Vec<Vec<Cq>>>,
}

/// Assign every basis vector its `ad T` eigenvalue.
pub fn grade(bd: &BasisData, t: &[Q]) -> Result<GradedDecomposition> {
    if t.len() != bd.rank() {
        return Err(Error::InvalidGradingElement(format!(
            "expected {} Cartan coordinates, got {}",
            bd.rank(),
            t.len()
        )));
    }
    let mut root_levels = Vec::with_capacity(bd.n_roots());
    for a in 0..bd.n_roots() {
        let l = bd.root_on_cartan(a, t);
        if !l.is_integer() {
            return Err(Error::InvalidGradingElement(format!(
                "root {} has non-integral level {l}",
                bd.roots.label(a)
            )));
        }
        root_levels.push(*l.numer() as i64);
    }
    let depth = root_levels.iter().map(|l| l.abs()).max().unwrap_or(0);
    let mut levels = vec![Vec::new(); (2 * depth + 1) as usize];
    for (a, &l) in root_levels.iter().enumerate() {
        levels[(l + depth) as usize].push(bd.unit::<Cq>(bd.root_slot(a)));
    }
    for i in 0..bd.rank() {
        levels[depth as usize].push(bd.unit::<Cq>(bd.cartan_slot(i)));
    }
    let v_roots = (0..bd.n_roots()).filter(|&a| root_levels[a] == 0).collect();
    let gd = GradedDecomposition {
        algebra: Arc::new(bd.algebra.clone()),
        grading_element: Some(t.to_vec()),
        root_levels: Some(root_levels),
        v_roots,
        min_level: -depth,
        levels,
    };
    if !gd.is_additive() {
        return Err(Error::InvalidGradingElement("graded bracket law fails".into()));
    }
    Ok(gd)
}

impl GradedDecomposition {
    /// Grading given by explicit level subspaces `(level, basis)`; they must
    /// form a direct sum decomposition of the algebra.
    pub fn from_levels(algebra: Arc<LieAlgebra>, parts: Vec<(i64, Vec<Vec<Cq>>)>) -> Result<Self> {
        let dim = algebra.dim();
        let lo = parts.iter().map(|p| p.0).min().unwrap_or(0).min(0);
        let hi = parts.iter().map(|p| p.0).max().unwrap_or(0).max(0);
        let mut levels = vec![Vec::new(); (hi - lo + 1) as usize];
        for (l, vs) in parts {
            if vs.iter().any(|v| v.len() != dim) {
                return Err(Error::DomainError(format!("level {l} vector has wrong length")));
            }
            levels[(l - lo) as usize].extend(vs);
        }
        let all: Vec<Vec<Cq>> = levels.iter().flatten().cloned().collect();
        if all.len() != dim || Subspace::span(dim, &all).dim() != dim {
            return Err(Error::DomainError("levels do not form a direct sum decomposition".into()));
        }
        Ok(Self {
            algebra,
            grading_element: None,
            root_levels: None,
            v_roots: Vec::new(),
            min_level: lo,
            levels,
        })
    }

    pub fn min_level(&self) -> i64 {
        self.min_level
    }

    pub fn max_level(&self) -> i64 {
        self.min_level + self.levels.len() as i64 - 1
    }

    /// `k` with nonzero levels inside `-k..=k`.
    pub fn depth(&self) -> usize {
        (self.min_level..=self.max_level())
            .filter(|&l| !self.level(l).is_empty())
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn level(&self, l: i64) -> &[Vec<Cq>] {
        if l < self.min_level || l > self.max_level() {
            return &[];
        }
        &self.levels[(l - self.min_level) as usize]
    }

    pub fn dims(&self) -> Vec<(i64, usize)> {
        let k = self.depth() as i64;
        (-k..=k).map(|l| (l, self.level(l).len())).collect()
    }

    fn span_where(&self, keep: impl Fn(i64) -> bool) -> Subspace<Cq> {
        let vs: Vec<Vec<Cq>> = (self.min_level..=self.max_level())
            .filter(|&l| keep(l))
            .flat_map(|l| self.level(l).iter().cloned())
            .collect();
        Subspace::span(self.algebra.dim(), &vs)
    }

    pub fn level_space(&self, l: i64) -> Subspace<Cq> {
        self.span_where(|m| m == l)
    }

    /// `g_{≤ m}`.
    pub fn at_most(&self, m: i64) -> Subspace<Cq> {
        self.span_where(|l| l <= m)
    }

    /// `g_{≥ m}`.
    pub fn at_least(&self, m: i64) -> Subspace<Cq> {
        self.span_where(|l| l >= m)
    }

    /// `g⁻ = ⊕_{l<0} g_l`.
    pub fn negative_part(&self) -> Subspace<Cq> {
        self.at_most(-1)
    }

    /// `[g_i, g_j] ⊆ g_{i+j}` for all `i, j`.
    pub fn is_additive(&self) -> bool {
        let (lo, hi) = (self.min_level, self.max_level());
        (lo..=hi).all(|i| {
            (i..=hi).all(|j| {
                let br = self.algebra.bracket_span(self.level(i), self.level(j));
                br.dim() == 0 || self.level_space(i + j).contains_space(&br)
            })
        })
    }

    pub fn report(&self) -> GradingReport {
        let rd_labels = self.root_levels.as_ref().map(|rl| rl.to_vec());
        GradingReport {
            grading_element: self.grading_element.as_ref().map(|t| crate::exact::qs(t)),
            depth: self.depth(),
            dims: self.dims().into_iter().map(|(level, dim)| LevelDim { level, dim }).collect(),
            root_levels: rd_labels,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelDim {
    pub level: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradingReport {
    pub grading_element: Option<Vec<crate::exact::QStr>>,
    pub depth: usize,
    pub dims: Vec<LevelDim>,
    pub root_levels: Option<Vec<i64>>,
}

/// Basis of `g_{-1}`.
pub fn superhorizontal(gd: &GradedDecomposition) -> Vec<Vec<Cq>> {
    gd.level(-1).to_vec()
}

/// A bracket word `[x_{w0}, [x_{w1}, … x_{wn}]]` in the generators.
pub type BracketWord = Vec<usize>;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum GenerationReport {
    Generating {
        depth: usize,
        /// Words of length `s + 1` added at step `s`.
        certificate: Vec<Vec<BracketWord>>,
    },
    NotGenerating {
        stabilized_dim: usize,
        target_dim: usize,
        stabilized: Vec<Vec<Cq>>,
    },
}

impl GenerationReport {
    pub fn depth(&self) -> Option<usize> {
        match self {
            GenerationReport::Generating { depth, .. } => Some(*depth),
            GenerationReport::NotGenerating { .. } => None,
        }
    }
}

/// Smallest `s` with `sub + [sub,sub] + …` (brackets of length up to `s`)
/// equal to `g⁻`.
pub fn check_bracket_generating(sub: &[Vec<Cq>], gd: &GradedDecomposition) -> Result<GenerationReport> {
    let la = &gd.algebra;
    let target = gd.negative_part();
    let gens = Subspace::span(la.dim(), sub);
    if !target.contains_space(&gens) {
        return Err(Error::DomainError("subspace is not contained in g⁻".into()));
    }
    let gens: Vec<Vec<Cq>> = gens.basis().to_vec();
    let mut span = Subspace::<Cq>::zero(la.dim());
    let mut frontier: Vec<(BracketWord, Vec<Cq>)> = Vec::new();
    let mut first = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if span.insert(g) {
            frontier.push((vec![i], g.clone()));
            first.push(vec![i]);
        }
    }
    let mut certificate = vec![first];
    loop {
        if span.dim() == target.dim() {
            return Ok(GenerationReport::Generating { depth: certificate.len(), certificate });
        }
        let mut next = Vec::new();
        let mut words = Vec::new();
        for (w, v) in &frontier {
            for (i, g) in gens.iter().enumerate() {
                let b = la.bracket(g, v);
                if span.insert(&b) {
                    let mut nw = vec![i];
                    nw.extend_from_slice(w);
                    words.push(nw.clone());
                    next.push((nw, b));
                }
            }
        }
        if next.is_empty() {
            return Ok(GenerationReport::NotGenerating {
                stabilized_dim: span.dim(),
                target_dim: target.dim(),
                stabilized: span.basis().to_vec(),
            });
        }
        certificate.push(words);
        frontier = next;
    }
}

/// Evaluate a bracket word on generators.
pub fn eval_word(la: &LieAlgebra, gens: &[Vec<Cq>], word: &[usize]) -> Vec<Cq> {
    let (last, rest) = word.split_last().expect("nonempty word");
    rest.iter().rev().fold(gens[*last].clone(), |acc, &i| la.bracket(&gens[i], &acc))
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BracketViolation {
    pub i: i64,
    pub minus_l: i64,
    pub law: String,
    pub witness: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct GradedBracketReport {
    pub violations: Vec<BracketViolation>,
    /// `[g_i, g_j] ⊆ g_{i+j}` for all levels.
    pub additive: bool,
}

impl GradedBracketReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `[g_i, g_{-ℓ}] ⊆ g_{≤ i-ℓ+1}` (i ≥ ℓ), `⊆ g_{≥ i-ℓ-1}` (i ≤ ℓ) and
/// `[g_i, g_{-i}] ⊆ g_{-1} + g_0 + g_1`, for `i, ℓ ≥ 1`.
pub fn validate_graded_brackets(gd: &GradedDecomposition) -> GradedBracketReport {
    let la = &gd.algebra;
    let k = gd.depth() as i64;
    let mut violations = Vec::new();
    for i in 1..=k {
        for l in 1..=k {
            let mut laws: Vec<(String, Subspace<Cq>)> = Vec::new();
            if i >= l {
                laws.push((format!("g_<={}", i - l + 1), gd.at_most(i - l + 1)));
            }
            if i <= l {
                laws.push((format!("g_>={}", i - l - 1), gd.at_least(i - l - 1)));
            }
            if i == l {
                let mid = gd.at_least(-1).intersection(&gd.at_most(1));
                laws.push(("g_-1+g_0+g_1".into(), mid));
            }
            for (a, x) in gd.level(i).iter().enumerate() {
                for (b, y) in gd.level(-l).iter().enumerate() {
                    let z = la.bracket(x, y);
                    for (name, space) in &laws {
                        if !space.contains(&z) {
                            violations.push(BracketViolation {
                                i,
                                minus_l: -l,
                                law: name.clone(),
                                witness: (a, b),
                            });
                        }
                    }
                }
            }
        }
    }
    GradedBracketReport { violations, additive: gd.is_additive() }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ParityViolation {
    pub level: i64,
    pub index: usize,
}

/// Even levels must lie in `kℂ`, odd levels in `qℂ`.
pub fn check_parity(gd: &GradedDecomposition, rf: &RealFormData) -> Vec<ParityViolation> {
    let dim = gd.algebra.dim();
    let k = Subspace::span(dim, &rf.k_basis);
    let p = Subspace::span(dim, &rf.q_basis);
    let mut out = Vec::new();
    for l in gd.min_level()..=gd.max_level() {
        let space = if l % 2 == 0 { &k } else { &p };
        for (index, v) in gd.level(l).iter().enumerate() {
            if !space.contains(v) {
                out.push(ParityViolation { level: l, index });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    /// Root sets (negative noncompact roots) of every candidate subspace
    /// that is `ad g_0`-invariant and bracket generating.
    pub candidates: Vec<Vec<usize>>,
    pub searched: usize,
    /// The only candidate is `g_{-1}` itself.
    pub unique: bool,
}

/// Enumerate `ad g_0`-invariant, bracket-generating sums of root spaces inside
/// `qℂ ∩ g⁻` with the dimension of `g_{-1}`.
pub fn superhorizontal_uniqueness(gd: &GradedDecomposition, rf: &RealFormData) -> Result<UniquenessReport> {
    let levels = gd
        .root_levels
        .as_ref()
        .ok_or_else(|| Error::DomainError("uniqueness check needs a root-basis grading".into()))?;
    let bd = &rf.basis;
    let pool: Vec<usize> =
        (0..bd.n_roots()).filter(|&a| levels[a] < 0 && !rf.eps.is_compact(a)).collect();
    let size = gd.level(-1).len();
    let g0 = gd.level(0);
    let mut level_m1: Vec<usize> = (0..bd.n_roots()).filter(|&a| levels[a] == -1).collect();
    level_m1.sort_unstable();
    let mut candidates = Vec::new();
    let mut searched = 0;
    for subset in combinations(&pool, size) {
        searched += 1;
        let vs: Vec<Vec<Cq>> = subset.iter().map(|&a| bd.unit::<Cq>(bd.root_slot(a))).collect();
        let span = Subspace::span(bd.dim(), &vs);
        if !span.contains_space(&gd.algebra.bracket_span(g0, &vs)) {
            continue;
        }
        if matches!(check_bracket_generating(&vs, gd)?, GenerationReport::Generating { .. }) {
            candidates.push(subset);
        }
    }
    let unique = candidates.len() == 1 && candidates[0] == level_m1;
    Ok(UniquenessReport { candidates, searched, unique })
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{apply_real_form, build_for_type, EpsilonLabels};

    fn flag(ty: &str, simple: &[i8], v: &[usize]) -> (Arc<BasisData>, RealFormData, GradedDecomposition) {
        let bd = Arc::new(build_for_type(ty.parse().unwrap()));
        let eps = EpsilonLabels::from_simple(&bd.roots, simple).unwrap();
        let rf = apply_real_form(&bd, &eps).unwrap();
        let t = grading_element(&bd.roots, v).unwrap();
        let gd = grade(&bd, &t).unwrap();
        (bd, rf, gd)
    }

    #[test]
    fn a2_levels() {
        let (bd, _, gd) = flag("A2", &[1, 1], &[]);
        let rl = gd.root_levels.as_ref().unwrap();
        assert_eq!(&rl[..3], &[1, 1, 2]);
        assert_eq!(gd.dims().iter().map(|d| d.1).collect::<Vec<_>>(), vec![1, 2, 2, 2, 1]);
        let t = grading_element(&bd.roots, &[0]).unwrap();
        let gd = grade(&bd, &t).unwrap();
        assert_eq!(&gd.root_levels.as_ref().unwrap()[..3], &[0, 1, 1]);
    }

    #[test]
    fn su21_generation_and_parity() {
        let (_, rf, gd) = flag("A2", &[1, 1], &[]);
        let g1 = superhorizontal(&gd);
        let rep = check_bracket_generating(&g1, &gd).unwrap();
        assert_eq!(rep.depth(), Some(2));
        let single = check_bracket_generating(&g1[..1], &gd).unwrap();
        assert!(matches!(single, GenerationReport::NotGenerating { stabilized_dim: 1, target_dim: 3, .. }));
        assert!(check_parity(&gd, &rf).is_empty());
        let u = superhorizontal_uniqueness(&gd, &rf).unwrap();
        assert!(u.unique, "{u:?}");
    }

    #[test]
    fn certificate_words_span() {
        let (_, _, gd) = flag("A3", &[1, 1, 1], &[]);
        let g1 = superhorizontal(&gd);
        assert_eq!(g1.len(), 3);
        let GenerationReport::Generating { depth, certificate } = check_bracket_generating(&g1, &gd).unwrap()
        else {
            panic!("A3 g_-1 generates");
        };
        assert_eq!(depth, 3);
        let gens = Subspace::span(gd.algebra.dim(), &g1).basis().to_vec();
        let vs: Vec<Vec<Cq>> =
            certificate.iter().flatten().map(|w| eval_word(&gd.algebra, &gens, w)).collect();
        assert!(Subspace::span(gd.algebra.dim(), &vs).same_as(&gd.negative_part()));
    }

    #[test]
    fn sum_of_dims_is_dim() {
        for (ty, simple) in [("A1", vec![1]), ("C2", vec![1, 1]), ("B2", vec![1, -1])] {
            let (bd, _, gd) = flag(ty, &simple, &[]);
            assert_eq!(gd.dims().iter().map(|d| d.1).sum::<usize>(), bd.dim());
            assert!(validate_graded_brackets(&gd).holds());
        }
    }

    #[test]
    fn relabelled_levels_violate_law() {
        let (bd, _, _) = flag("A2", &[1, 1], &[]);
        let u = |a: usize| bd.unit::<Cq>(a);
        let (a1, a2, th) = (0, 1, 2);
        let neg = |a| bd.roots.negative_of(a);
        let cartan = (0..2).map(|i| u(bd.cartan_slot(i))).collect();
        let gd = GradedDecomposition::from_levels(
            Arc::new(bd.algebra.clone()),
            vec![
                (2, vec![u(th)]),
                (1, vec![u(a1), u(neg(a2))]),
                (0, cartan),
                (-1, vec![u(neg(a1)), u(a2)]),
                (-2, vec![u(neg(th))]),
            ],
        )
        .unwrap();
        let rep = validate_graded_brackets(&gd);
        assert!(!rep.additive);
        assert!(!rep.holds());
    }

    #[test]
    fn non_integral_element_rejected() {
        let bd = build_for_type("A1".parse().unwrap());
        assert!(matches!(grade(&bd, &[crate::exact::qr(1, 4)]), Err(Error::InvalidGradingElement(_))));
    }
}
