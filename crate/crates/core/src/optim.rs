//! Multi-start projected gradient ascent on the Euclidean unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereOptConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SphereOptConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iter: 5000, tol: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereRun {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereOptResult {
    pub best: SphereRun,
    /// Final value of every restart, in restart order.
    pub values: Vec<f64>,
    /// `max - min` over the restart values.
    pub spread: f64,
    pub total_iterations: usize,
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            normalize(&mut x);
            return x;
        }
    }
}

fn ascend<F>(f: &F, mut x: Vec<f64>, cfg: &SphereOptConfig) -> SphereRun
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (mut fx, mut g) = f(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let gt: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - radial * b).collect();
        let gn2: f64 = gt.iter().map(|v| v * v).sum();
        if gn2.sqrt() < cfg.tol {
            converged = true;
            break;
        }
        let mut accepted = false;
        while step > 1e-18 {
            let mut y: Vec<f64> = x.iter().zip(&gt).map(|(a, b)| a + step * b).collect();
            normalize(&mut y);
            let (fy, gy) = f(&y);
            if fy >= fx + 1e-4 * step * gn2 {
                x = y;
                fx = fy;
                g = gy;
                step = (step * 2.0).min(1e6);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No ascent possible at working precision.
            converged = true;
            break;
        }
    }
    SphereRun { value: fx, point: x, iterations, converged }
}

/// Maximize `f` (value and Euclidean gradient) over the unit sphere of `ℝ^dim`.
pub fn maximize_on_sphere<F>(dim: usize, f: F, cfg: &SphereOptConfig) -> SphereOptResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    assert!(dim > 0 && cfg.restarts > 0);
    let runs: Vec<SphereRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            ascend(&f, random_unit(dim, &mut rng), cfg)
        })
        .collect();
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let total_iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| match a.value.total_cmp(&b.value) {
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Equal => {
                let ord = a.point.iter().zip(&b.point).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne());
                if ord == Some(std::cmp::Ordering::Greater) {
                    b
                } else {
                    a
                }
            }
        })
        .expect("at least one restart");
    SphereOptResult { best, values, spread: max - min, total_iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_quotient() {
        // Max of xᵀAx on the sphere is the top eigenvalue.
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let f = |x: &[f64]| {
            let ax: Vec<f64> = a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect();
            let v = ax.iter().zip(x).map(|(p, q)| p * q).sum();
            (v, ax.iter().map(|v| 2.0 * v).collect())
        };
        let r = maximize_on_sphere(3, f, &SphereOptConfig { restarts: 8, ..Default::default() });
        assert!((r.best.value - 3.0).abs() < 1e-12);
        assert!(r.spread < 1e-10);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] * x[1], vec![x[1], x[0]]);
        let cfg = SphereOptConfig { restarts: 6, seed: 7, ..Default::default() };
        let a = maximize_on_sphere(2, f, &cfg);
        let b = maximize_on_sphere(2, f, &cfg);
        assert_eq!(a.best.point, b.best.point);
        assert_eq!(a.values, b.values);
    }
}
