//! Upper estimators for the Kobayashi pseudo-distance and infinitesimal
//! metric of `(M, D)`, the Carnot–Carathéodory distance, and Schwarz-type
//! lower bounds.

use serde::{Deserialize, Serialize};

use crate::chart::{ChartDistribution, ChartDomain, C64};
use crate::error::{Error, Result};
use crate::flows::{chow_connect, solve_complex, solve_real, ConnectConfig, Generator};

/// Poincaré distance of curvature `-1`: `2·artanh(|a-b| / |1 - āb|)`.
pub fn poincare_distance(a: C64, b: C64) -> Result<f64> {
    if a.norm() >= 1.0 || b.norm() >= 1.0 {
        return Err(Error::DomainError("Poincaré distance needs points of the open unit disc".into()));
    }
    let t = (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm();
    Ok(2.0 * t.min(1.0 - f64::EPSILON).atanh())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Upper,
    Lower,
    Heuristic,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Residuals {
    pub horizontality: f64,
    pub endpoint: f64,
}

/// `value = None` means no admissible witness was found (`δ = ∞`).
#[derive(Clone, Debug, Serialize)]
pub struct DistanceEstimate<W> {
    pub value: Option<f64>,
    pub kind: EstimateKind,
    pub witness: Option<W>,
    pub residuals: Residuals,
}

impl<W> DistanceEstimate<W> {
    pub fn unreachable() -> Self {
        Self { value: None, kind: EstimateKind::Upper, witness: None, residuals: Residuals::default() }
    }

    pub fn is_reachable(&self) -> bool {
        self.value.is_some()
    }
}

type Series = Vec<C64>;

fn s_mul(a: &[C64], b: &[C64], deg: usize) -> Series {
    let mut out = vec![C64::new(0.0, 0.0); deg + 1];
    for (i, x) in a.iter().enumerate().take(deg + 1) {
        if *x == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn s_eval(a: &[C64], z: C64) -> C64 {
    a.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn s_deriv(a: &[C64]) -> Series {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn s_pad(mut a: Series, deg: usize) -> Series {
    a.resize(deg + 1, C64::new(0.0, 0.0));
    a.truncate(deg + 1);
    a
}

/// Holomorphic disc `ζ ↦ f(ζ)` given by power series in every coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct HorizontalDisc {
    pub components: Vec<Series>,
    /// `sup |f_T' - F_T F_H⁻¹ f_H'|` on the boundary sample ring.
    pub residual: f64,
    /// `max_i sup |f_i|` on the boundary ring.
    pub sup_norm: f64,
}

impl HorizontalDisc {
    pub fn eval(&self, z: C64) -> Vec<C64> {
        self.components.iter().map(|s| s_eval(s, z)).collect()
    }

    pub fn derivative(&self, z: C64) -> Vec<C64> {
        self.components.iter().map(|s| s_eval(&s_deriv(s), z)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscConfig {
    pub series_degree: usize,
    pub ring_samples: usize,
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self { series_degree: 40, ring_samples: 64 }
    }
}

fn frame_uses_tail(cd: &ChartDistribution) -> bool {
    let d = cd.rank();
    cd.frame.iter().flat_map(|f| f.0.iter()).any(|p| p.terms().any(|(e, _)| e[d..].iter().any(|&k| k > 0)))
}

fn compose_poly(p: &crate::chart::Polynomial, comps: &[Series], deg: usize) -> Series {
    let mut out = vec![C64::new(0.0, 0.0); deg + 1];
    for (e, c) in p.terms() {
        let mut term = vec![C64::new(0.0, 0.0); deg + 1];
        term[0] = c.to_c64();
        for (i, &k) in e.iter().enumerate() {
            for _ in 0..k {
                term = s_mul(&term, &comps[i], deg);
            }
        }
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    out
}

fn ring(samples: usize) -> impl Iterator<Item = C64> {
    (0..samples).map(move |k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / samples as f64))
}

/// Integrate `f_T' = F_T(f) F_H(f)⁻¹ f_H'` from `f_T(0) = tail0` as power
/// series, given the head components `f_H`.
pub fn horizontal_disc_from_free_part(
    cd: &ChartDistribution,
    free: &[Series],
    z0: &[C64],
    cfg: &DiscConfig,
) -> Result<HorizontalDisc> {
    let (n, d) = (cd.n, cd.rank());
    if free.len() != d || z0.len() != n {
        return Err(Error::DomainError("free part must have one series per frame field".into()));
    }
    for (i, f) in free.iter().enumerate() {
        let c0 = f.first().copied().unwrap_or_default();
        if (c0 - z0[i]).norm() > 1e-12 * (1.0 + z0[i].norm()) {
            return Err(Error::DomainError(format!("free component {i} does not start at z0")));
        }
    }
    if n == d {
        let mut disc = HorizontalDisc { components: free.to_vec(), residual: 0.0, sup_norm: 0.0 };
        let (res, sup) = disc_diagnostics(cd, &disc, cfg.ring_samples);
        disc.residual = res;
        disc.sup_norm = sup;
        return Ok(disc);
    }
    let head_deg = free.iter().map(|f| f.len().saturating_sub(1)).max().unwrap_or(0);
    let deg = cfg.series_degree.max(head_deg);
    let head: Vec<Series> = free.iter().map(|f| s_pad(f.clone(), deg)).collect();
    let head_d: Vec<Series> = head.iter().map(|f| s_pad(s_deriv(f), deg)).collect();
    let mut tail: Vec<Series> = (d..n).map(|i| s_pad(vec![z0[i]], deg)).collect();
    let passes = if frame_uses_tail(cd) { deg + 1 } else { 1 };
    let blowup = 1e12 * (1.0 + cd.box_radius);
    for _ in 0..passes {
        let all: Vec<Series> = head.iter().chain(&tail).cloned().collect();
        // F[r][i] = component r of X_i along f.
        let fm: Vec<Vec<Series>> =
            (0..n).map(|r| (0..d).map(|i| compose_poly(&cd.frame[i].0[r], &all, deg)).collect()).collect();
        let a0: Vec<Vec<C64>> = (0..d).map(|r| (0..d).map(|i| fm[r][i][0]).collect()).collect();
        let mut c: Vec<Series> = vec![vec![C64::new(0.0, 0.0); deg + 1]; d];
        for k in 0..=deg {
            let rhs: Vec<C64> = (0..d)
                .map(|r| {
                    let mut v = head_d[r][k];
                    for j in 1..=k {
                        for i in 0..d {
                            v -= fm[r][i][j] * c[i][k - j];
                        }
                    }
                    v
                })
                .collect();
            let ck = solve_complex(&a0, &rhs)
                .ok_or_else(|| Error::DiscEscape("head block of the frame is singular at the centre".into()))?;
            for i in 0..d {
                c[i][k] = ck[i];
            }
        }
        let mut new_tail = Vec::with_capacity(n - d);
        for r in d..n {
            let mut deriv = vec![C64::new(0.0, 0.0); deg + 1];
            for i in 0..d {
                let t = s_mul(&fm[r][i], &c[i], deg);
                for (a, b) in deriv.iter_mut().zip(t) {
                    *a += b;
                }
            }
            let mut s = vec![C64::new(0.0, 0.0); deg + 1];
            s[0] = z0[r];
            for k in 0..deg {
                s[k + 1] = deriv[k] / (k + 1) as f64;
            }
            if s.iter().map(|x| x.norm()).sum::<f64>() > blowup || s.iter().any(|x| !x.is_finite()) {
                return Err(Error::DiscEscape("tail series diverges on the unit disc".into()));
            }
            new_tail.push(s);
        }
        tail = new_tail;
    }
    let components: Vec<Series> = head.into_iter().chain(tail).collect();
    let mut disc = HorizontalDisc { components, residual: 0.0, sup_norm: 0.0 };
    let (res, sup) = disc_diagnostics(cd, &disc, cfg.ring_samples);
    disc.residual = res;
    disc.sup_norm = sup;
    Ok(disc)
}

fn disc_diagnostics(cd: &ChartDistribution, disc: &HorizontalDisc, samples: usize) -> (f64, f64) {
    let (n, d) = (cd.n, cd.rank());
    let mut res: f64 = 0.0;
    let mut sup: f64 = 0.0;
    let derivs: Vec<Series> = disc.components.iter().map(|s| s_deriv(s)).collect();
    for z in ring(samples) {
        let f = disc.eval(z);
        sup = f.iter().map(|c| c.norm()).fold(sup, f64::max);
        if n == d {
            continue;
        }
        let fd: Vec<C64> = derivs.iter().map(|s| s_eval(s, z)).collect();
        let m = cd.frame_matrix(&f);
        let head: Vec<Vec<C64>> = m[..d].to_vec();
        let Some(c) = solve_complex(&head, &fd[..d]) else {
            res = f64::INFINITY;
            continue;
        };
        for r in d..n {
            let want: C64 = (0..d).map(|i| m[r][i] * c[i]).sum();
            res = res.max((fd[r] - want).norm());
        }
    }
    (res, sup)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KobayashiConfig {
    /// Degree cap of the free part.
    pub degree: usize,
    pub max_links: usize,
    /// Smallest parameter radius tried on charts that are all of `ℂⁿ`.
    pub min_radius: f64,
    pub max_radius: f64,
    pub bisection_iter: usize,
    pub newton_iter: usize,
    /// Tail endpoint tolerance.
    pub tol: f64,
    pub disc: DiscConfig,
    pub connect: ConnectConfig,
}

impl Default for KobayashiConfig {
    fn default() -> Self {
        Self {
            degree: 4,
            max_links: 8,
            min_radius: 1e-3,
            max_radius: 1.0 - 1e-9,
            bisection_iter: 60,
            newton_iter: 30,
            tol: 1e-10,
            disc: DiscConfig::default(),
            connect: ConnectConfig::default(),
        }
    }
}

/// One link: a disc with `f(0) = x_{j-1}`, `f(r) = x_j`.
#[derive(Clone, Debug, Serialize)]
pub struct DiscLink {
    pub disc: HorizontalDisc,
    pub a: C64,
    pub b: C64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscChain {
    pub links: Vec<DiscLink>,
    pub points: Vec<Vec<C64>>,
    pub value: f64,
}

/// Free-part family `f_H(ζ) = lead(ζ) + ζ^k P(ζ)` with real parameters `p`.
struct FreeFamily {
    d: usize,
    /// Coefficients of the fixed part per head component.
    lead: Vec<Series>,
    /// Multiplier polynomial `q(ζ)` in front of `P`.
    mult: Series,
    pdeg: usize,
}

impl FreeFamily {
    fn nparams(&self) -> usize {
        2 * self.d * self.pdeg
    }

    fn series(&self, p: &[f64]) -> Vec<Series> {
        (0..self.d)
            .map(|i| {
                let pc: Series =
                    (0..self.pdeg).map(|k| C64::new(p[2 * (i * self.pdeg + k)], p[2 * (i * self.pdeg + k) + 1])).collect();
                let extra = if pc.is_empty() { Vec::new() } else { s_mul(&self.mult, &pc, self.mult.len() + pc.len()) };
                let len = self.lead[i].len().max(extra.len());
                let mut s = s_pad(self.lead[i].clone(), len.saturating_sub(1));
                for (a, b) in s.iter_mut().zip(extra) {
                    *a += b;
                }
                while s.len() > 1 && s.last() == Some(&C64::new(0.0, 0.0)) {
                    s.pop();
                }
                s
            })
            .collect()
    }
}

fn smooth_sup(disc: &HorizontalDisc, samples: usize, beta: f64) -> f64 {
    let vals: Vec<f64> = ring(samples).flat_map(|z| disc.eval(z).into_iter().map(|c| c.norm())).collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + vals.iter().map(|v| (beta * (v - m)).exp()).sum::<f64>().ln() / beta
}

type SmoothEval<'a> = dyn Fn(&[f64]) -> Option<(f64, Vec<f64>, HorizontalDisc)> + 'a;

/// BFGS with finite-difference gradients; stops early once the true sup
/// norm is within `limit`.
fn bfgs_min(p0: Vec<f64>, f: &SmoothEval, limit: f64, iters: usize) -> Option<(Vec<f64>, HorizontalDisc)> {
    let n = p0.len();
    if n == 0 {
        return None;
    }
    let (mut fx, mut p, mut disc) = f(&p0)?;
    let grad = |p: &[f64], fx: f64| -> Option<Vec<f64>> {
        let h = 1e-7;
        (0..n)
            .map(|j| {
                let mut q = p.to_vec();
                q[j] += h;
                f(&q).map(|(v, _, _)| (v - fx) / h)
            })
            .collect()
    };
    let mut g = grad(&p, fx)?;
    let mut hinv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..iters {
        if disc.sup_norm <= limit {
            break;
        }
        let dir: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| hinv[i][j] * g[j]).sum::<f64>()).collect();
        let slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            continue;
        }
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let cand: Vec<f64> = p.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            if let Some((v, q, d)) = f(&cand) {
                if v <= fx + 1e-4 * t * slope {
                    next = Some((v, q, d));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((v, q, d)) = next else { break };
        let gq = grad(&q, v)?;
        let s: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gq.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-18 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i][j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let done = (fx - v).abs() <= 1e-14 * fx.abs().max(1.0);
        fx = v;
        p = q;
        disc = d;
        g = gq;
        if done {
            break;
        }
    }
    Some((p, disc))
}

struct LinkSolver<'a> {
    cd: &'a ChartDistribution,
    cfg: &'a KobayashiConfig,
}

impl<'a> LinkSolver<'a> {
    fn disc(&self, fam: &FreeFamily, p: &[f64], z0: &[C64]) -> Option<HorizontalDisc> {
        horizontal_disc_from_free_part(self.cd, &fam.series(p), z0, &self.cfg.disc).ok()
    }

    fn tail_residual(&self, fam: &FreeFamily, p: &[f64], z0: &[C64], at: C64, goal: &[C64]) -> Option<Vec<f64>> {
        let disc = self.disc(fam, p, z0)?;
        let v = disc.eval(at);
        let d = self.cd.rank();
        Some(v[d..].iter().zip(&goal[d..]).flat_map(|(a, b)| [(a - b).re, (a - b).im]).collect())
    }

    /// Minimum-norm Gauss–Newton on `p` for the tail condition.
    fn solve_tail(&self, fam: &FreeFamily, p0: &[f64], z0: &[C64], at: C64, goal: &[C64]) -> Option<Vec<f64>> {
        let mut p = p0.to_vec();
        let norm = |r: &[f64]| r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut r = self.tail_residual(fam, &p, z0, at, goal)?;
        let m = r.len();
        if m == 0 {
            return Some(p);
        }
        let np = p.len();
        for _ in 0..self.cfg.newton_iter {
            if norm(&r) <= self.cfg.tol {
                return Some(p);
            }
            if np == 0 {
                return None;
            }
            let h = 1e-7;
            let mut jac = vec![vec![0.0; np]; m];
            for j in 0..np {
                let mut pp = p.clone();
                pp[j] += h;
                let mut pm = p.clone();
                pm[j] -= h;
                let rp = self.tail_residual(fam, &pp, z0, at, goal)?;
                let rm = self.tail_residual(fam, &pm, z0, at, goal)?;
                for i in 0..m {
                    jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            // δ = -Jᵀ (J Jᵀ)⁻¹ r
            let jjt: Vec<Vec<f64>> = (0..m)
                .map(|a| (0..m).map(|b| (0..np).map(|k| jac[a][k] * jac[b][k]).sum()).collect())
                .collect();
            let mu = solve_real(jjt, r.iter().map(|v| -v).collect())?;
            let delta: Vec<f64> = (0..np).map(|k| (0..m).map(|a| jac[a][k] * mu[a]).sum()).collect();
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..12 {
                let cand: Vec<f64> = p.iter().zip(&delta).map(|(a, b)| a + lambda * b).collect();
                if let Some(rc) = self.tail_residual(fam, &cand, z0, at, goal) {
                    if norm(&rc) < norm(&r) {
                        p = cand;
                        r = rc;
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (norm(&r) <= self.cfg.tol).then_some(p)
    }

    /// Pattern search on `p` lowering the boundary sup norm below the box
    /// radius, re-solving the tail condition after each move.
    fn fit_in_box(
        &self,
        fam: &FreeFamily,
        p0: Vec<f64>,
        z0: &[C64],
        tail: Option<(C64, &[C64])>,
    ) -> Option<(Vec<f64>, HorizontalDisc)> {
        let limit = self.cd.box_radius * (1.0 + 1e-12);
        let project = |p: Vec<f64>| match tail {
            Some((at, goal)) => self.solve_tail(fam, &p, z0, at, goal),
            None => Some(p),
        };
        let mut p = project(p0)?;
        let mut disc = self.disc(fam, &p, z0)?;
        if self.cd.domain == ChartDomain::Entire || disc.sup_norm <= limit {
            return Some((p, disc));
        }
        // Smoothed sup norm, sharpened in stages.
        for beta in [16.0, 128.0, 1024.0, 8192.0] {
            let beta = beta / self.cd.box_radius;
            let smooth = |q: &[f64]| -> Option<(f64, Vec<f64>, HorizontalDisc)> {
                let q = project(q.to_vec())?;
                let disc = self.disc(fam, &q, z0)?;
                Some((smooth_sup(&disc, self.cfg.disc.ring_samples, beta), q, disc))
            };
            if let Some((q, d)) = bfgs_min(p.clone(), &smooth, limit, 30) {
                if d.sup_norm < disc.sup_norm {
                    p = q;
                    disc = d;
                }
            }
            if disc.sup_norm <= limit {
                return Some((p, disc));
            }
        }
        let mut step = 0.01 * self.cd.box_radius;
        while step > 1e-9 {
            let mut moved = false;
            for j in 0..p.len() {
                for s in [step, -step] {
                    let mut cand = p.clone();
                    cand[j] += s;
                    let Some(cand) = project(cand) else { continue };
                    let Some(cd) = self.disc(fam, &cand, z0) else { continue };
                    if cd.sup_norm < disc.sup_norm {
                        p = cand;
                        disc = cd;
                        moved = true;
                        if disc.sup_norm <= limit {
                            return Some((p, disc));
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        None
    }

    fn link_family(&self, x: &[C64], y: &[C64], r: f64) -> FreeFamily {
        let d = self.cd.rank();
        let lead = (0..d).map(|i| vec![x[i], (y[i] - x[i]) / r]).collect();
        let pdeg = self.cfg.degree.saturating_sub(1);
        // ζ(ζ - r) P(ζ)
        let mult = vec![C64::new(0.0, 0.0), C64::new(-r, 0.0), C64::new(1.0, 0.0)];
        FreeFamily { d, lead, mult, pdeg }
    }

    fn feasible_link(&self, x: &[C64], y: &[C64], r: f64, warm: &[f64]) -> Option<(Vec<f64>, HorizontalDisc)> {
        let fam = self.link_family(x, y, r);
        let p0 = if warm.len() == fam.nparams() { warm.to_vec() } else { vec![0.0; fam.nparams()] };
        let at = C64::new(r, 0.0);
        self.fit_in_box(&fam, p0, x, Some((at, y)))
    }

    /// Smallest admissible `r` for a single disc from `x` to `y`.
    fn best_link(&self, x: &[C64], y: &[C64]) -> Option<DiscLink> {
        let entire = self.cd.domain == ChartDomain::Entire;
        let lo0 = if entire { self.cfg.min_radius } else { 0.0 };
        let hi0 = self.cfg.max_radius;
        let link = |r: f64, disc: HorizontalDisc| DiscLink {
            disc,
            a: C64::new(0.0, 0.0),
            b: C64::new(r, 0.0),
            value: poincare_distance(C64::new(0.0, 0.0), C64::new(r, 0.0)).unwrap_or(f64::INFINITY),
        };
        if entire {
            if let Some((_, disc)) = self.feasible_link(x, y, lo0, &[]) {
                return Some(link(lo0, disc));
            }
        }
        let (mut p_hi, mut disc_hi) = self.feasible_link(x, y, hi0, &[])?;
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..self.cfg.bisection_iter {
            let mid = 0.5 * (lo + hi);
            if mid <= 0.0 {
                break;
            }
            match self.feasible_link(x, y, mid, &p_hi) {
                Some((p, disc)) => {
                    hi = mid;
                    p_hi = p;
                    disc_hi = disc;
                }
                None => lo = mid,
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        Some(link(hi, disc_hi))
    }

    fn chain_through(&self, points: &[Vec<C64>]) -> Option<DiscChain> {
        let mut links = Vec::new();
        for w in points.windows(2) {
            let same = w[0].iter().zip(&w[1]).all(|(a, b)| (a - b).norm() <= 1e-14);
            if same {
                continue;
            }
            links.push(self.best_link(&w[0], &w[1])?);
        }
        let value = links.iter().map(|l| l.value).sum();
        Some(DiscChain { links, points: points.to_vec(), value })
    }
}

fn straight_points(x: &[C64], y: &[C64], k: usize) -> Vec<Vec<C64>> {
    (0..=k)
        .map(|s| x.iter().zip(y).map(|(a, b)| a + (b - a) * (s as f64 / k as f64)).collect())
        .collect()
}

/// Upper estimate of `d_{M,D}(x, y)` over chains of polynomial horizontal discs.
pub fn kobayashi_upper(
    cd: &ChartDistribution,
    x: &[C64],
    y: &[C64],
    cfg: &KobayashiConfig,
) -> Result<DistanceEstimate<DiscChain>> {
    if x.len() != cd.n || y.len() != cd.n {
        return Err(Error::DomainError("point dimension does not match the chart".into()));
    }
    if !cd.in_domain(x) || !cd.in_domain(y) {
        return Err(Error::DomainError("points must lie in the chart domain".into()));
    }
    if x.iter().zip(y).all(|(a, b)| a == b) {
        let chain = DiscChain { links: Vec::new(), points: vec![x.to_vec()], value: 0.0 };
        return Ok(DistanceEstimate {
            value: Some(0.0),
            kind: EstimateKind::Upper,
            witness: Some(chain),
            residuals: Residuals::default(),
        });
    }
    let solver = LinkSolver { cd, cfg };
    let mut candidates: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut k = 1;
    while k <= cfg.max_links {
        candidates.push(straight_points(x, y, k));
        k *= 2;
    }
    let mut best: Option<DiscChain> = None;
    let consider = |chain: Option<DiscChain>, best: &mut Option<DiscChain>| {
        if let Some(c) = chain {
            if best.as_ref().is_none_or(|b| c.value < b.value) {
                *best = Some(c);
            }
        }
    };
    for pts in &candidates {
        consider(solver.chain_through(pts), &mut best);
        if best.is_some() {
            break;
        }
    }
    if best.is_none() {
        // Points along a flow word: each frame flow is itself a horizontal disc.
        match chow_connect(cd, x, y, &cfg.connect) {
            Ok(word) => {
                let mut pts = vec![x.to_vec()];
                let mut z = x.to_vec();
                for stage in word.stages.iter().rev() {
                    let elem: Vec<(usize, C64)> = match &stage.generator {
                        Generator::Frame(i) => vec![(*i, stage.time)],
                        Generator::Bracket(w) => crate::flows::expand_bracket(w, stage.time),
                    };
                    for (i, t) in elem.into_iter().rev() {
                        z = crate::flows::compose_flows(cd, &[crate::flows::FlowStage::frame(i, t)], &z, &cfg.connect.step)?;
                        pts.push(z.clone());
                    }
                }
                if let Some(last) = pts.last_mut() {
                    *last = y.to_vec();
                }
                if pts.len() - 1 <= cfg.max_links {
                    consider(solver.chain_through(&pts), &mut best);
                }
            }
            Err(Error::NoConnection(_)) => return Ok(DistanceEstimate::unreachable()),
            Err(e) => return Err(e),
        }
    }
    let Some(chain) = best else {
        return Ok(DistanceEstimate::unreachable());
    };
    let horizontality = chain.links.iter().map(|l| l.disc.residual).fold(0.0, f64::max);
    let endpoint = chain
        .links
        .iter()
        .zip(chain.points.windows(2).filter(|w| w[0] != w[1]))
        .map(|(l, w)| {
            let v = l.disc.eval(l.b);
            v.iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    Ok(DistanceEstimate {
        value: Some(chain.value),
        kind: EstimateKind::Upper,
        witness: Some(chain),
        residuals: Residuals { horizontality, endpoint },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricEstimate {
    /// Upper bound for `k_{M,D}(v)` (`= 2λ`).
    pub value: f64,
    pub lambda: f64,
    pub disc: HorizontalDisc,
}

/// Upper estimate of the infinitesimal metric: smallest `λ` with a disc
/// `f(0) = x`, `λ f'(0) = v`.
pub fn infinitesimal_metric_upper(
    cd: &ChartDistribution,
    x: &[C64],
    v: &[C64],
    cfg: &KobayashiConfig,
) -> Result<MetricEstimate> {
    let (n, d) = (cd.n, cd.rank());
    if x.len() != n || v.len() != n {
        return Err(Error::DomainError("dimension mismatch".into()));
    }
    let vn = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if vn == 0.0 {
        return Err(Error::DomainError("zero tangent vector".into()));
    }
    let m = cd.frame_matrix(x);
    let c = solve_complex(&m[..d], &v[..d])
        .ok_or_else(|| Error::DomainError("frame head block singular at x".into()))?;
    for r in d..n {
        let w: C64 = (0..d).map(|i| m[r][i] * c[i]).sum();
        if (w - v[r]).norm() > 1e-9 * (1.0 + vn) {
            return Err(Error::DomainError("vector is not in the distribution at x".into()));
        }
    }
    let solver = LinkSolver { cd, cfg };
    let family = |scale: f64| FreeFamily {
        d,
        lead: (0..d).map(|i| vec![x[i], v[i] * scale]).collect(),
        mult: vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        pdeg: cfg.degree.saturating_sub(1),
    };
    // The disc has f'(0) = scale·v, so λ = 1/scale.
    let warm = std::cell::RefCell::new(Vec::new());
    let feasible = |scale: f64| {
        let fam = family(scale);
        let p0 = warm.borrow().clone();
        let p0 = if p0.len() == fam.nparams() { p0 } else { vec![0.0; fam.nparams()] };
        let (p, disc) = solver.fit_in_box(&fam, p0, x, None)?;
        *warm.borrow_mut() = p.clone();
        Some((p, disc))
    };
    let max_scale = 1.0 / (cfg.min_radius * vn);
    if cd.domain == ChartDomain::Entire {
        if let Some((_, disc)) = feasible(max_scale) {
            let lambda = 1.0 / max_scale;
            return Ok(MetricEstimate { value: 2.0 * lambda, lambda, disc });
        }
    }
    let mut lo = 0.0;
    let mut hi = max_scale;
    let mut best = None;
    // Find a feasible lower scale first.
    let mut s = 1.0 / vn;
    for _ in 0..60 {
        if let Some((_, disc)) = feasible(s) {
            lo = s;
            best = Some(disc);
            break;
        }
        hi = s;
        s *= 0.5;
    }
    let mut disc = best.ok_or_else(|| Error::DiscEscape("no admissible disc through x".into()))?;
    for _ in 0..cfg.bisection_iter {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some((_, d)) => {
                lo = mid;
                disc = d;
            }
            None => hi = mid,
        }
        if (hi - lo) <= 1e-10 * hi {
            break;
        }
    }
    let lambda = 1.0 / lo;
    Ok(MetricEstimate { value: 2.0 * lambda, lambda, disc })
}

/// Hermitian metric on `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionMetric {
    /// The frame is orthonormal.
    FrameOrthonormal,
    /// `s²|dz|²/(1-|z|²)²` on the unit disc with `s = 2/√(-curvature)`.
    PoincareDisc { curvature: f64 },
}

impl DistributionMetric {
    /// Speed of `γ' = F(z)u`, and the Gram matrix `W` of the control norm.
    fn weight(&self, cd: &ChartDistribution, z: &[C64]) -> Result<Vec<Vec<C64>>> {
        let d = cd.rank();
        match self {
            DistributionMetric::FrameOrthonormal => Ok((0..d)
                .map(|i| (0..d).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect()),
            DistributionMetric::PoincareDisc { curvature } => {
                if cd.n != 1 || d != 1 || *curvature >= 0.0 {
                    return Err(Error::DomainError("Poincaré metric needs a disc chart and negative curvature".into()));
                }
                let r2 = z[0].norm_sqr();
                if r2 >= 1.0 {
                    return Err(Error::DiscEscape("path left the unit disc".into()));
                }
                let s = 2.0 / (-curvature).sqrt();
                let x = cd.frame[0].eval(z)[0];
                let w = s * s * x.norm_sqr() / ((1.0 - r2) * (1.0 - r2));
                Ok(vec![vec![C64::new(w, 0.0)]])
            }
        }
    }

    fn speed(&self, cd: &ChartDistribution, z: &[C64], u: &[C64]) -> Result<f64> {
        let w = self.weight(cd, z)?;
        let q: C64 = (0..u.len()).flat_map(|i| (0..u.len()).map(move |j| (i, j))).map(|(i, j)| u[i].conj() * w[i][j] * u[j]).sum();
        Ok(q.re.max(0.0).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcConfig {
    pub segments: usize,
    pub substeps: usize,
    pub max_iter: usize,
    pub endpoint_tol: f64,
}

impl Default for CcConfig {
    fn default() -> Self {
        Self { segments: 64, substeps: 4, max_iter: 300, endpoint_tol: 1e-9 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizontalPath {
    /// Control `u_k ∈ ℂ^d` on segment `k` (each of duration `1/K`).
    pub controls: Vec<Vec<C64>>,
    pub base: Vec<C64>,
    pub endpoint: Vec<C64>,
    pub length: f64,
    pub endpoint_error: f64,
}

fn segment(cd: &ChartDistribution, z: &[C64], u: &[C64], dt: f64, substeps: usize) -> Vec<C64> {
    let f = |p: &[C64]| {
        let mut out = vec![C64::new(0.0, 0.0); cd.n];
        for (x, ui) in cd.frame.iter().zip(u) {
            for (o, v) in out.iter_mut().zip(x.eval(p)) {
                *o += v * ui;
            }
        }
        out
    };
    let h = dt / substeps as f64;
    let mut z = z.to_vec();
    for _ in 0..substeps {
        let sh = |p: &[C64], k: &[C64], s: f64| p.iter().zip(k).map(|(a, b)| a + b * s).collect::<Vec<_>>();
        let k1 = f(&z);
        let k2 = f(&sh(&z, &k1, h / 2.0));
        let k3 = f(&sh(&z, &k2, h / 2.0));
        let k4 = f(&sh(&z, &k3, h));
        z = (0..cd.n).map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)).collect();
    }
    z
}

/// Homogeneous size of `y - x` in the bracket-adapted frame at `x`.
fn homogeneous_norm(cd: &ChartDistribution, x: &[C64], y: &[C64]) -> Result<f64> {
    let (_, words) = cd
        .bracket_generating_at(x, cd.n)
        .ok_or_else(|| Error::NoConnection("frame is not bracket generating at the base point".into()))?;
    let fields: Vec<Vec<C64>> =
        words.iter().map(|w| crate::chart::VectorField::from_word(&cd.frame, w).eval(x)).collect();
    let m: Vec<Vec<C64>> = (0..cd.n).map(|r| fields.iter().map(|c| c[r]).collect()).collect();
    let diff: Vec<C64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let tau = solve_complex(&m, &diff).ok_or_else(|| Error::DegenerateFrame("bracket frame singular".into()))?;
    Ok(tau.iter().zip(&words).map(|(t, w)| t.norm().powf(1.0 / w.len() as f64)).fold(0.0, f64::max))
}

/// Upper estimate of the Carnot–Carathéodory distance by piecewise-constant
/// controls: minimum-energy Gauss–Newton with the endpoint constraint.
pub fn cc_distance_upper(
    cd: &ChartDistribution,
    metric: &DistributionMetric,
    x: &[C64],
    y: &[C64],
    cfg: &CcConfig,
) -> Result<DistanceEstimate<HorizontalPath>> {
    let (n, d, kseg) = (cd.n, cd.rank(), cfg.segments.max(1));
    if x.len() != n || y.len() != n {
        return Err(Error::DomainError("point dimension does not match the chart".into()));
    }
    let dt = 1.0 / kseg as f64;
    if x.iter().zip(y).all(|(a, b)| a == b) {
        let path = HorizontalPath {
            controls: vec![vec![C64::new(0.0, 0.0); d]; kseg],
            base: x.to_vec(),
            endpoint: x.to_vec(),
            length: 0.0,
            endpoint_error: 0.0,
        };
        return Ok(DistanceEstimate {
            value: Some(0.0),
            kind: EstimateKind::Upper,
            witness: Some(path),
            residuals: Residuals::default(),
        });
    }
    let scale = homogeneous_norm(cd, x, y)?;
    let forward = |u: &[Vec<C64>]| -> Vec<Vec<C64>> {
        let mut pts = vec![x.to_vec()];
        for uk in u {
            let next = segment(cd, pts.last().unwrap(), uk, dt, cfg.substeps);
            pts.push(next);
        }
        pts
    };
    let err_of = |z: &[C64]| z.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    // Loops of both orientations and phases; a loop of size N encloses area ~ N²/4π.
    let mut starts: Vec<(f64, Vec<Vec<C64>>)> = Vec::new();
    for amp in [scale, scale * (4.0 * std::f64::consts::PI).sqrt()] {
        for rot in 0..4 {
            let w = C64::from_polar(1.0, rot as f64 * std::f64::consts::FRAC_PI_2);
            let u: Vec<Vec<C64>> = (0..kseg)
                .map(|k| {
                    (0..d)
                        .map(|i| {
                            let ph = 2.0 * std::f64::consts::PI * k as f64 / kseg as f64
                                + i as f64 * std::f64::consts::FRAC_PI_2;
                            let z = C64::new(amp * ph.cos(), 0.0);
                            if i == 0 {
                                z
                            } else {
                                z * w
                            }
                        })
                        .collect()
                })
                .collect();
            let e = err_of(&forward(&u)[kseg]);
            starts.push((e, u));
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut last = Error::NoConnection("no initial controls".into());
    for (_, u) in starts.into_iter().take(3) {
        match cc_gauss_newton(cd, metric, x, y, u, scale, cfg, &forward, &err_of) {
            Ok(est) => return Ok(est),
            Err(e) => last = e,
        }
    }
    Err(last)
}

type ControlMap<'a> = dyn Fn(&[Vec<C64>]) -> Vec<Vec<C64>> + 'a;

#[allow(clippy::too_many_arguments)]
fn cc_gauss_newton(
    cd: &ChartDistribution,
    metric: &DistributionMetric,
    x: &[C64],
    y: &[C64],
    mut u: Vec<Vec<C64>>,
    scale: f64,
    cfg: &CcConfig,
    forward: &ControlMap,
    err_of: &dyn Fn(&[C64]) -> f64,
) -> Result<DistanceEstimate<HorizontalPath>> {
    let (n, d, kseg) = (cd.n, cd.rank(), u.len());
    let dt = 1.0 / kseg as f64;
    let mut pts = forward(&u);
    let mut err = err_of(&pts[kseg]);
    let h = 1e-7;
    for _ in 0..cfg.max_iter {
        if pts.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::NoConnection("path diverged".into()));
        }
        // Segment Jacobians.
        let mut a_mats = Vec::with_capacity(kseg);
        let mut b_mats = Vec::with_capacity(kseg);
        let mut weights = Vec::with_capacity(kseg);
        for k in 0..kseg {
            let z = &pts[k];
            let col = |dz: &[C64], du: &[C64]| {
                let zp: Vec<C64> = z.iter().zip(dz).map(|(a, b)| a + b).collect();
                let zm: Vec<C64> = z.iter().zip(dz).map(|(a, b)| a - b).collect();
                let up: Vec<C64> = u[k].iter().zip(du).map(|(a, b)| a + b).collect();
                let um: Vec<C64> = u[k].iter().zip(du).map(|(a, b)| a - b).collect();
                let fp = segment(cd, &zp, &up, dt, cfg.substeps);
                let fm = segment(cd, &zm, &um, dt, cfg.substeps);
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
            };
            let zero_n = vec![C64::new(0.0, 0.0); n];
            let zero_d = vec![C64::new(0.0, 0.0); d];
            let a_cols: Vec<Vec<C64>> = (0..n)
                .map(|j| {
                    let mut e = zero_n.clone();
                    e[j] = C64::new(h, 0.0);
                    col(&e, &zero_d)
                })
                .collect();
            let b_cols: Vec<Vec<C64>> = (0..d)
                .map(|j| {
                    let mut e = zero_d.clone();
                    e[j] = C64::new(h, 0.0);
                    col(&zero_n, &e)
                })
                .collect();
            a_mats.push(a_cols);
            b_mats.push(b_cols);
            let mid = segment(cd, z, &u[k], dt / 2.0, cfg.substeps);
            weights.push(metric.weight(cd, &mid)?);
        }
        // J_k = A_{K-1}⋯A_{k+1} B_k, columns stored.
        let mut jac: Vec<Vec<Vec<C64>>> = vec![Vec::new(); kseg];
        let mut prod: Vec<Vec<C64>> =
            (0..n).map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        for k in (0..kseg).rev() {
            jac[k] = b_mats[k]
                .iter()
                .map(|col| (0..n).map(|r| (0..n).map(|c| prod[r][c] * col[c]).sum()).collect())
                .collect();
            // prod = prod · A_k  (A_k given by columns)
            let new: Vec<Vec<C64>> = (0..n)
                .map(|r| (0..n).map(|c| (0..n).map(|m| prod[r][m] * a_mats[k][c][m]).sum()).collect())
                .collect();
            prod = new;
        }
        // Minimum W-norm solution of J u' = y - F + J u.
        let mut rhs: Vec<C64> = y.iter().zip(&pts[kseg]).map(|(a, b)| a - b).collect();
        for k in 0..kseg {
            for (j, col) in jac[k].iter().enumerate() {
                for r in 0..n {
                    rhs[r] += col[r] * u[k][j];
                }
            }
        }
        let mut winv_jh: Vec<Vec<Vec<C64>>> = Vec::with_capacity(kseg);
        let mut s = vec![vec![C64::new(0.0, 0.0); n]; n];
        for k in 0..kseg {
            // rows j of W⁻¹ Jᴴ: d × n
            let jh: Vec<Vec<C64>> = (0..d).map(|j| (0..n).map(|r| jac[k][j][r].conj()).collect()).collect();
            let cols: Vec<Vec<C64>> = (0..n)
                .map(|r| {
                    let b: Vec<C64> = (0..d).map(|j| jh[j][r]).collect();
                    solve_complex(&weights[k], &b).unwrap_or_else(|| vec![C64::new(0.0, 0.0); d])
                })
                .collect();
            let m: Vec<Vec<C64>> = (0..d).map(|j| (0..n).map(|r| cols[r][j]).collect()).collect();
            for a in 0..n {
                for b in 0..n {
                    s[a][b] += (0..d).map(|j| jac[k][j][a] * m[j][b]).sum::<C64>();
                }
            }
            winv_jh.push(m);
        }
        let Some(mu) = solve_complex(&s, &rhs) else {
            return Err(Error::NoConnection("endpoint map is singular along the path".into()));
        };
        let target: Vec<Vec<C64>> = winv_jh
            .iter()
            .map(|m| m.iter().map(|row| row.iter().zip(&mu).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand: Vec<Vec<C64>> = u
                .iter()
                .zip(&target)
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + (q - p) * alpha).collect())
                .collect();
            let cp = forward(&cand);
            let ce = err_of(&cp[kseg]);
            if ce.is_finite() && (ce <= err.max(cfg.endpoint_tol) * 1.5 || ce < 1e-3 * scale.max(1e-12)) {
                let change: f64 = cand
                    .iter()
                    .zip(&u)
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm()))
                    .fold(0.0, f64::max);
                u = cand;
                pts = cp;
                err = ce;
                accepted = true;
                if err <= cfg.endpoint_tol && change <= 1e-10 * scale.max(1e-300) {
                    return finish_path(cd, metric, x, u, pts, err, cfg);
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if err <= cfg.endpoint_tol * 1e3 {
        return finish_path(cd, metric, x, u, pts, err, cfg);
    }
    Err(Error::NoConnection(format!("endpoint error {err:e} after {} iterations", cfg.max_iter)))
}

fn finish_path(
    cd: &ChartDistribution,
    metric: &DistributionMetric,
    x: &[C64],
    u: Vec<Vec<C64>>,
    pts: Vec<Vec<C64>>,
    err: f64,
    cfg: &CcConfig,
) -> Result<DistanceEstimate<HorizontalPath>> {
    let kseg = u.len();
    let dt = 1.0 / kseg as f64;
    // Simpson's rule on each segment.
    let mut length = 0.0;
    let sub = 8;
    for (k, uk) in u.iter().enumerate() {
        let mut z = pts[k].clone();
        let h = dt / sub as f64;
        for _ in 0..sub {
            let zm = segment(cd, &z, uk, h / 2.0, cfg.substeps);
            let ze = segment(cd, &z, uk, h, cfg.substeps);
            let s0 = metric.speed(cd, &z, uk)?;
            let s1 = metric.speed(cd, &zm, uk)?;
            let s2 = metric.speed(cd, &ze, uk)?;
            length += h / 6.0 * (s0 + 4.0 * s1 + s2);
            z = ze;
        }
    }
    let endpoint = pts.last().cloned().unwrap_or_else(|| x.to_vec());
    let path = HorizontalPath { controls: u, base: x.to_vec(), endpoint, length, endpoint_error: err };
    Ok(DistanceEstimate {
        value: Some(length),
        kind: EstimateKind::Upper,
        witness: Some(path),
        residuals: Residuals { horizontality: 0.0, endpoint: err },
    })
}

/// Whether `ρ` is exact (or derived) or only a numerical upper estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoKind {
    Exact,
    UpperEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchwarzBound {
    pub value: f64,
    pub kind: EstimateKind,
    pub c: f64,
    pub rho: f64,
}

/// `√c·ρ`, a lower bound for `d_{M,D}` when `ρ` is exact.
pub fn schwarz_lower_bound(c: f64, rho: f64, rho_kind: RhoKind) -> Result<SchwarzBound> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidCertificate(format!("curvature bound must be positive, got {c}")));
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::DomainError(format!("ρ must be nonnegative, got {rho}")));
    }
    let kind = match rho_kind {
        RhoKind::Exact => EstimateKind::Lower,
        RhoKind::UpperEstimate => EstimateKind::Heuristic,
    };
    Ok(SchwarzBound { value: c.sqrt() * rho, kind, c, rho })
}

pub fn schwarz_from_certificate(
    cert: &crate::curvature::CurvatureCertificate,
    rho: f64,
    rho_kind: RhoKind,
) -> Result<SchwarzBound> {
    schwarz_lower_bound(cert.c, rho, rho_kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{heisenberg, unit_disc};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn poincare_values() {
        assert!((poincare_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(poincare_distance(c(0.3, 0.2), c(0.3, 0.2)).unwrap(), 0.0);
        assert!(poincare_distance(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn heisenberg_discs() {
        let h = heisenberg(1.0);
        let z0 = [c(0.0, 0.0); 3];
        let disc = horizontal_disc_from_free_part(
            &h,
            &[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            &z0,
            &DiscConfig::default(),
        )
        .unwrap();
        assert!(disc.residual < 1e-12);
        assert!((disc.components[2][2] - c(0.5, 0.0)).norm() < 1e-15);
        let flat = horizontal_disc_from_free_part(&h, &[vec![c(0.0, 0.0), c(7.0, 0.0)], vec![c(0.0, 0.0)]], &z0, &DiscConfig::default())
            .unwrap();
        assert!(flat.components[2].iter().all(|v| v.norm() == 0.0));
        let constant =
            horizontal_disc_from_free_part(&h, &[vec![c(0.2, 0.0)], vec![c(0.1, 0.0)]], &[c(0.2, 0.0), c(0.1, 0.0), c(0.3, 0.0)], &DiscConfig::default())
                .unwrap();
        assert!(constant.components[2][1..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn disc_calibration() {
        let cfg = KobayashiConfig::default();
        let delta = unit_disc();
        let est = kobayashi_upper(&delta, &[c(0.0, 0.0)], &[c(0.5, 0.0)], &cfg).unwrap();
        assert!((est.value.unwrap() - 3f64.ln()).abs() < 1e-3);
        let k = infinitesimal_metric_upper(&delta, &[c(0.0, 0.0)], &[c(1.0, 0.0)], &cfg).unwrap();
        assert!((k.value - 2.0).abs() < 1e-3);
    }

    #[test]
    fn heisenberg_degenerates() {
        let cfg = KobayashiConfig::default();
        let h = heisenberg(2.0);
        let est = kobayashi_upper(&h, &[c(0.0, 0.0); 3], &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], &cfg).unwrap();
        assert!(est.value.unwrap() < 0.01);
        let k = infinitesimal_metric_upper(&h, &[c(0.0, 0.0); 3], &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], &cfg).unwrap();
        assert!(k.value <= 2e-3 + 1e-12);
    }

    #[test]
    fn schwarz_arithmetic() {
        assert_eq!(schwarz_lower_bound(0.25, 2.0, RhoKind::Exact).unwrap().value, 1.0);
        assert_eq!(schwarz_lower_bound(0.5, 0.0, RhoKind::Exact).unwrap().value, 0.0);
        assert!(matches!(schwarz_lower_bound(0.0, 1.0, RhoKind::Exact), Err(Error::InvalidCertificate(_))));
        assert_eq!(schwarz_lower_bound(0.5, 1.0, RhoKind::UpperEstimate).unwrap().kind, EstimateKind::Heuristic);
    }

    #[test]
    fn cc_disc_geodesic() {
        let delta = unit_disc();
        let m = DistributionMetric::PoincareDisc { curvature: -1.0 };
        let est = cc_distance_upper(&delta, &m, &[c(0.0, 0.0)], &[c(0.5, 0.0)], &CcConfig::default()).unwrap();
        assert!((est.value.unwrap() - 3f64.ln()).abs() < 1e-2, "{:?}", est.value);
    }

    #[test]
    fn cc_heisenberg_vertical() {
        // Isoperimetric inequality: a loop enclosing area 1 has length ≥ √(4π).
        let h = heisenberg(2.0);
        let m = DistributionMetric::FrameOrthonormal;
        let y = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let est = cc_distance_upper(&h, &m, &[c(0.0, 0.0); 3], &y, &CcConfig::default()).unwrap();
        let v = est.value.unwrap();
        let want = (4.0 * std::f64::consts::PI).sqrt();
        assert!(v >= want - 1e-6 && v < want + 1e-2, "{v}");
    }
}
