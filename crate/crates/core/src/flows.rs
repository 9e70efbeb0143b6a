//! Complex flows of polynomial vector fields, flow words, the local map `F`,
//! and Chow connectivity by Newton continuation.

use serde::{Deserialize, Serialize};

use crate::chart::{insert_numeric, ChartDistribution, VectorField, C64};
use crate::error::{Error, Result};
use crate::grading::BracketWord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    /// Absolute local error per accepted step (chart max-norm).
    pub tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// Escape radius as a multiple of the chart box radius.
    pub escape_factor: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { tol: 1e-10, initial_step: 0.05, max_steps: 1_000_000, escape_factor: 10.0 }
    }
}

fn max_norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn rk4(x: &VectorField, coef: C64, z: &[C64], h: f64) -> Vec<C64> {
    let f = |p: &[C64]| x.eval(p).into_iter().map(|v| v * coef).collect::<Vec<_>>();
    let shift = |p: &[C64], k: &[C64], s: f64| p.iter().zip(k).map(|(a, b)| a + b * s).collect::<Vec<_>>();
    let k1 = f(z);
    let k2 = f(&shift(z, &k1, h / 2.0));
    let k3 = f(&shift(z, &k2, h / 2.0));
    let k4 = f(&shift(z, &k3, h));
    (0..z.len()).map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)).collect()
}

/// Solve `z' = coef·X(z)` for real time `s`; `Err(norm)` on escape.
fn integrate_real(
    x: &VectorField,
    coef: C64,
    z0: &[C64],
    s: f64,
    cfg: &StepConfig,
    escape: f64,
) -> std::result::Result<Vec<C64>, f64> {
    let mut z = z0.to_vec();
    if s == 0.0 {
        return Ok(z);
    }
    let dir = s.signum();
    let mut done = 0.0;
    let total = s.abs();
    let mut h = cfg.initial_step.min(total);
    let mut steps = 0;
    while done < total {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(max_norm(&z));
        }
        let last = done + h >= total;
        let hh = if last { total - done } else { h };
        let y1 = rk4(x, coef, &z, dir * hh);
        let mid = rk4(x, coef, &z, dir * hh / 2.0);
        let y2 = rk4(x, coef, &mid, dir * hh / 2.0);
        let diff: Vec<C64> = y2.iter().zip(&y1).map(|(a, b)| a - b).collect();
        let err = max_norm(&diff) / 15.0;
        if !err.is_finite() {
            return Err(f64::INFINITY);
        }
        if err <= cfg.tol {
            z = y2.iter().zip(&diff).map(|(a, d)| a + d / 15.0).collect();
            done = if last { total } else { done + hh };
            let n = max_norm(&z);
            if n > escape {
                return Err(n);
            }
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (cfg.tol / err).powf(0.2)).clamp(0.2, 4.0) };
        h = if last && err <= cfg.tol { h } else { hh * factor };
        if h < 1e-14 * total.max(1.0) {
            return Err(max_norm(&z));
        }
    }
    Ok(z)
}

/// `Φ_X(t)z₀ = φ_X(Re t) ∘ φ_{iX}(Im t) z₀`.
pub fn integrate_complex_flow(
    x: &VectorField,
    z0: &[C64],
    t: C64,
    cfg: &StepConfig,
    escape_radius: f64,
) -> Result<Vec<C64>> {
    let esc = |norm| Error::FlowEscape { stage: 0, norm };
    let z = integrate_real(x, C64::new(0.0, 1.0), z0, t.im, cfg, escape_radius).map_err(esc)?;
    integrate_real(x, C64::new(1.0, 0.0), &z, t.re, cfg, escape_radius).map_err(esc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Frame(usize),
    /// Bracket word in frame indices, realized by nested commutator flows.
    Bracket(BracketWord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowStage {
    pub generator: Generator,
    pub time: C64,
}

impl FlowStage {
    pub fn frame(i: usize, time: C64) -> Self {
        Self { generator: Generator::Frame(i), time }
    }
}

/// Stages listed in composition order: `[s₁, …, s_m]` means
/// `φ_{s₁} ∘ ⋯ ∘ φ_{s_m}`, so the last stage acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowWord {
    pub stages: Vec<FlowStage>,
    pub base: Vec<C64>,
    pub target: Vec<C64>,
    pub endpoint: Vec<C64>,
    /// `‖endpoint - target‖_∞`.
    pub error: f64,
}

/// Elementary frame flows of a bracket word with time `τ`: the commutator
/// `φ_A(t) S(t) φ_A(-t) S(t)⁻¹` with `t = √(-τ)`.
pub fn expand_bracket(word: &[usize], tau: C64) -> Vec<(usize, C64)> {
    if word.len() == 1 {
        return vec![(word[0], tau)];
    }
    let t = (-tau).sqrt();
    let inner = expand_bracket(&word[1..], t);
    let inverse: Vec<(usize, C64)> = inner.iter().rev().map(|&(i, s)| (i, -s)).collect();
    let mut out = vec![(word[0], t)];
    out.extend(inner);
    out.push((word[0], -t));
    out.extend(inverse);
    out
}

fn elementary(stages: &[FlowStage]) -> Vec<(usize, usize, C64)> {
    stages
        .iter()
        .enumerate()
        .flat_map(|(k, s)| match &s.generator {
            Generator::Frame(i) => vec![(k, *i, s.time)],
            Generator::Bracket(w) => expand_bracket(w, s.time).into_iter().map(|(i, t)| (k, i, t)).collect(),
        })
        .collect()
}

pub fn escape_radius(cd: &ChartDistribution, cfg: &StepConfig) -> f64 {
    cfg.escape_factor * cd.box_radius
}

/// Apply the composition of `stages` to `base`.
pub fn compose_flows(cd: &ChartDistribution, stages: &[FlowStage], base: &[C64], cfg: &StepConfig) -> Result<Vec<C64>> {
    let esc = escape_radius(cd, cfg);
    let mut z = base.to_vec();
    for (k, i, t) in elementary(stages).into_iter().rev() {
        let x = cd.frame.get(i).ok_or_else(|| Error::DomainError(format!("frame index {i} out of range")))?;
        z = integrate_complex_flow(x, &z, t, cfg, esc).map_err(|e| match e {
            Error::FlowEscape { norm, .. } => Error::FlowEscape { stage: k, norm },
            other => other,
        })?;
    }
    Ok(z)
}

/// Re-run a recorded word from its base point.
pub fn replay(cd: &ChartDistribution, word: &FlowWord, cfg: &StepConfig) -> Result<Vec<C64>> {
    compose_flows(cd, &word.stages, &word.base, cfg)
}

/// `F(t₁,…,t_n) = φ₁(t₁)∘⋯∘φ_n(t_n) base` over the completed frame.
pub fn local_map(cd: &ChartDistribution, base: &[C64], t: &[C64], cfg: &StepConfig) -> Result<Vec<C64>> {
    let esc = escape_radius(cd, cfg);
    let mut z = base.to_vec();
    for (k, (x, ti)) in cd.full_frame().into_iter().zip(t).enumerate().rev() {
        z = integrate_complex_flow(x, &z, *ti, cfg, esc).map_err(|e| match e {
            Error::FlowEscape { norm, .. } => Error::FlowEscape { stage: k, norm },
            other => other,
        })?;
    }
    Ok(z)
}

/// Central-difference Jacobian of [`local_map`] at `t = 0`.
pub fn jacobian_at_zero(cd: &ChartDistribution, base: &[C64], cfg: &StepConfig) -> Result<Vec<Vec<C64>>> {
    if !cd.is_complete() {
        return Err(Error::DegenerateFrame("frame has no completion to a full basis".into()));
    }
    let n = cd.n;
    let h = 1e-5;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut tp = vec![C64::new(0.0, 0.0); n];
        tp[j] = C64::new(h, 0.0);
        let mut tm = tp.clone();
        tm[j] = C64::new(-h, 0.0);
        let fp = local_map(cd, base, &tp, cfg)?;
        let fm = local_map(cd, base, &tm, cfg)?;
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let mut basis = Vec::new();
    for c in &cols {
        if !insert_numeric(&mut basis, c.clone()) {
            return Err(Error::DegenerateFrame(format!("dF is singular at {base:?}")));
        }
    }
    Ok((0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConnectConfig {
    pub endpoint_tol: f64,
    pub max_waypoints: usize,
    pub newton_iter: usize,
    pub fd_step: f64,
    pub step: StepConfig,
}

impl Default for ConnectConfig {
    fn default() -> Self {
        Self { endpoint_tol: 1e-10, max_waypoints: 1024, newton_iter: 40, fd_step: 1e-7, step: StepConfig::default() }
    }
}

/// Solve a dense real system by Gaussian elimination with partial pivoting.
pub(crate) fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub(crate) fn solve_complex(m: &[Vec<C64>], rhs: &[C64]) -> Option<Vec<C64>> {
    let n = rhs.len();
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    let mut b = vec![0.0; 2 * n];
    for r in 0..n {
        for c in 0..n {
            let z = m[r][c];
            a[r][c] = z.re;
            a[r][n + c] = -z.im;
            a[n + r][c] = z.im;
            a[n + r][n + c] = z.re;
        }
        b[r] = rhs[r].re;
        b[n + r] = rhs[r].im;
    }
    let x = solve_real(a, b)?;
    Some((0..n).map(|i| C64::new(x[i], x[n + i])).collect())
}

struct LocalChart<'a> {
    cd: &'a ChartDistribution,
    gens: Vec<Generator>,
    fields: Vec<VectorField>,
    cfg: &'a ConnectConfig,
}

impl<'a> LocalChart<'a> {
    fn new(cd: &'a ChartDistribution, x: &[C64], cfg: &'a ConnectConfig) -> Result<Self> {
        let (gens, fields) = if cd.is_complete() {
            let gens = (0..cd.rank())
                .map(Generator::Frame)
                .chain(cd.completion.iter().map(|(w, _)| Generator::Bracket(w.clone())))
                .collect();
            (gens, cd.full_frame().into_iter().cloned().collect())
        } else {
            let (_, words) = cd
                .bracket_generating_at(x, cd.n)
                .ok_or_else(|| Error::NoConnection("frame is not bracket generating at the base point".into()))?;
            let gens = words
                .iter()
                .map(|w| if w.len() == 1 { Generator::Frame(w[0]) } else { Generator::Bracket(w.clone()) })
                .collect();
            let fields = words.iter().map(|w| VectorField::from_word(&cd.frame, w)).collect();
            (gens, fields)
        };
        Ok(Self { cd, gens, fields, cfg })
    }

    fn stages(&self, tau: &[C64]) -> Vec<FlowStage> {
        self.gens.iter().zip(tau).map(|(g, t)| FlowStage { generator: g.clone(), time: *t }).collect()
    }

    fn eval(&self, base: &[C64], tau: &[C64]) -> Result<Vec<C64>> {
        compose_flows(self.cd, &self.stages(tau), base, &self.cfg.step)
    }

    /// Newton on the real coordinates of `τ` driving the endpoint to `goal`.
    fn newton(&self, base: &[C64], goal: &[C64]) -> Option<(Vec<C64>, f64)> {
        let n = self.cd.n;
        let diff: Vec<C64> = goal.iter().zip(base).map(|(a, b)| a - b).collect();
        let m: Vec<Vec<C64>> = {
            let cols: Vec<Vec<C64>> = self.fields.iter().map(|f| f.eval(base)).collect();
            (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
        };
        let mut tau = solve_complex(&m, &diff).unwrap_or_else(|| vec![C64::new(0.0, 0.0); n]);
        let residual = |tau: &[C64]| -> Option<(Vec<C64>, f64)> {
            let z = self.eval(base, tau).ok()?;
            let r: Vec<C64> = z.iter().zip(goal).map(|(a, b)| a - b).collect();
            let e = max_norm(&r);
            Some((r, e))
        };
        let (mut r, mut err) = residual(&tau)?;
        for _ in 0..self.cfg.newton_iter {
            if err <= self.cfg.endpoint_tol {
                return Some((tau, err));
            }
            let mut jac = vec![vec![0.0; 2 * n]; 2 * n];
            for j in 0..2 * n {
                let h = self.cfg.fd_step * (1.0 + tau[j % n].norm());
                let dir = if j < n { C64::new(h, 0.0) } else { C64::new(0.0, h) };
                let mut tp = tau.clone();
                tp[j % n] += dir;
                let mut tm = tau.clone();
                tm[j % n] -= dir;
                let fp = self.eval(base, &tp).ok()?;
                let fm = self.eval(base, &tm).ok()?;
                for i in 0..n {
                    let d = (fp[i] - fm[i]) / (2.0 * h);
                    jac[i][j] = d.re;
                    jac[n + i][j] = d.im;
                }
            }
            let rhs: Vec<f64> = r.iter().map(|c| -c.re).chain(r.iter().map(|c| -c.im)).collect();
            let delta = solve_real(jac, rhs)?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..12 {
                let cand: Vec<C64> =
                    (0..n).map(|i| tau[i] + C64::new(delta[i], delta[n + i]) * lambda).collect();
                if let Some((rc, ec)) = residual(&cand) {
                    if ec < err {
                        tau = cand;
                        r = rc;
                        err = ec;
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
        (err <= self.cfg.endpoint_tol).then_some((tau, err))
    }
}

/// Flow word from `x` to `y` built by Newton continuation along straight
/// waypoints, doubling the waypoint count on failure.
pub fn chow_connect(cd: &ChartDistribution, x: &[C64], y: &[C64], cfg: &ConnectConfig) -> Result<FlowWord> {
    if x.len() != cd.n || y.len() != cd.n {
        return Err(Error::DomainError("point dimension does not match the chart".into()));
    }
    let finish = |stages: Vec<FlowStage>| -> Result<FlowWord> {
        let endpoint = compose_flows(cd, &stages, x, &cfg.step)?;
        let error = max_norm(&endpoint.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
        Ok(FlowWord { stages, base: x.to_vec(), target: y.to_vec(), endpoint, error })
    };
    if max_norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()) <= cfg.endpoint_tol {
        return finish(Vec::new());
    }
    let local = LocalChart::new(cd, x, cfg)?;
    let mut k = 1;
    while k <= cfg.max_waypoints {
        let mut segments: Vec<Vec<FlowStage>> = Vec::new();
        let mut current = x.to_vec();
        let mut ok = true;
        for s in 1..=k {
            let frac = s as f64 / k as f64;
            let goal: Vec<C64> = x.iter().zip(y).map(|(a, b)| a + (b - a) * frac).collect();
            match local.newton(&current, &goal) {
                Some((tau, _)) => {
                    let stages: Vec<FlowStage> =
                        local.stages(&tau).into_iter().filter(|st| st.time.norm() > 1e-15).collect();
                    match compose_flows(cd, &stages, &current, &cfg.step) {
                        Ok(z) => current = z,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                    segments.push(stages);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let stages: Vec<FlowStage> = segments.into_iter().rev().flatten().collect();
            let word = finish(stages)?;
            if word.error <= cfg.endpoint_tol * 10.0 {
                return Ok(word);
            }
        }
        k *= 2;
    }
    Err(Error::NoConnection(format!("Newton continuation failed with {} waypoints", cfg.max_waypoints)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{heisenberg, Polynomial};
    use crate::exact::{q, Cq};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_field_translation() {
        let h = heisenberg(1.0);
        let z = integrate_complex_flow(&h.frame[0], &[c(0.0, 0.0); 3], c(1.0, 1.0), &StepConfig::default(), 100.0)
            .unwrap();
        assert_eq!(z, vec![c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn heisenberg_second_field_closed_form() {
        let h = heisenberg(1.0);
        let a = c(0.7, -0.2);
        let t = c(0.3, 0.4);
        let z = integrate_complex_flow(&h.frame[1], &[a, c(0.0, 0.0), c(0.0, 0.0)], t, &StepConfig::default(), 100.0)
            .unwrap();
        let want = [a, t, a * t];
        for (p, w) in z.iter().zip(&want) {
            assert!((p - w).norm() < 1e-12);
        }
    }

    #[test]
    fn commutator_word() {
        let h = heisenberg(1.0);
        let t = c(0.5, 0.0);
        let stages = vec![
            FlowStage::frame(0, t),
            FlowStage::frame(1, t),
            FlowStage::frame(0, -t),
            FlowStage::frame(1, -t),
        ];
        let z = compose_flows(&h, &stages, &[c(0.0, 0.0); 3], &StepConfig::default()).unwrap();
        assert!((z[2] + t * t).norm() < 1e-12 && z[0].norm() < 1e-12 && z[1].norm() < 1e-12);
        let bracket = vec![FlowStage { generator: Generator::Bracket(vec![0, 1]), time: -t * t }];
        let zb = compose_flows(&h, &bracket, &[c(0.0, 0.0); 3], &StepConfig::default()).unwrap();
        assert!((zb[2] + t * t).norm() < 1e-12);
    }

    #[test]
    fn escape_detected() {
        // z' = z² blows up at t = 1 from z = 1.
        let n = 1;
        let f = VectorField(vec![Polynomial::var(n, 0).mul(&Polynomial::var(n, 0))]);
        let cd = ChartDistribution::new("blowup", vec![f], vec![], 1.0, crate::chart::ChartDomain::Entire).unwrap();
        let r = compose_flows(&cd, &[FlowStage::frame(0, c(2.0, 0.0))], &[c(1.0, 0.0)], &StepConfig::default());
        assert!(matches!(r, Err(Error::FlowEscape { stage: 0, .. })));
    }

    #[test]
    fn degenerate_frame() {
        let h = heisenberg(1.0);
        let x2 = h.frame[0].scale(Cq::real(q(2)));
        let cd = ChartDistribution::new("fake", vec![h.frame[0].clone(), x2], vec![vec![0, 1]], 1.0, h.domain)
            .unwrap();
        assert!(matches!(jacobian_at_zero(&cd, &[c(0.0, 0.0); 3], &StepConfig::default()), Err(Error::DegenerateFrame(_))));
    }

    #[test]
    fn connect_commutator_target() {
        let h = heisenberg(1.0);
        let w = chow_connect(&h, &[c(0.0, 0.0); 3], &[c(0.0, 0.0), c(0.0, 0.0), c(-0.01, 0.0)], &ConnectConfig::default())
            .unwrap();
        assert!(w.error < 1e-8);
        let br = w.stages.iter().find(|s| matches!(s.generator, Generator::Bracket(_))).unwrap();
        assert!(((-br.time).sqrt() - c(0.1, 0.0)).norm() < 1e-6);
    }
}
