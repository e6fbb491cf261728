#![allow(dead_code)]

use std::path::Path;

use cego::gp::{GpModel, Kernel, KernelFamily, Observation, ParameterVector};
use cego::harness::{InitialDesign, PolicyParams, PolicySpec, ProblemSpec, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random GP with `n` observations in `[-2, 2]^dim` plus 8 query points.
pub fn random_model(
    seed: u64,
    dim: usize,
    n: usize,
    family: KernelFamily,
) -> (GpModel<f64>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ls: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
    let scale = rng.random_range(0.5..2.0);
    let noise = 10f64.powf(rng.random_range(-4.0..-1.0));
    let k = Kernel::new(family, ls, scale).unwrap();
    let obs: Vec<_> = (0..n)
        .map(|_| {
            let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = p.iter().map(|x| x.sin()).sum::<f64>() + rng.random_range(-0.1..0.1);
            Observation::new(ParameterVector(p), y, 0)
        })
        .collect();
    let model = GpModel::with_observations(k, noise, 0, obs).unwrap();
    let queries = (0..8)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.5..2.5)).collect())
        .collect();
    (model, queries)
}

/// Gauss-Jordan inverse with partial pivoting, row-major.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x * n + c].abs().total_cmp(&m[y * n + c].abs()))
            .unwrap();
        for j in 0..n {
            m.swap(c * n + j, p * n + j);
            inv.swap(c * n + j, p * n + j);
        }
        let d = m[c * n + c];
        for j in 0..n {
            m[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                if f != 0.0 {
                    for j in 0..n {
                        m[r * n + j] -= f * m[c * n + j];
                        inv[r * n + j] -= f * inv[c * n + j];
                    }
                }
            }
        }
    }
    inv
}

/// Posterior mean and variance from an explicit inverse of `K + λI`.
pub fn dense_posterior(model: &GpModel<f64>, q: &[f64]) -> (f64, f64) {
    let pts = model.points();
    let n = pts.len();
    let k = model.kernel();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = k.eval(&pts[i], &pts[j]).unwrap();
        }
        a[i * n + i] += model.noise_variance();
    }
    let inv = invert(&a, n);
    let kq: Vec<f64> = pts.iter().map(|p| k.eval(p, q).unwrap()).collect();
    let y = model.values();
    let mut mean = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            mean += kq[i] * inv[i * n + j] * y[j];
            quad += kq[i] * inv[i * n + j] * kq[j];
        }
    }
    (mean, k.eval(q, q).unwrap() - quad)
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

pub fn python3_available() -> bool {
    std::process::Command::new("python3")
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// Artificial-problem experiment with bundled defaults, writing below `dir`.
pub fn artificial_config(
    dir: &Path,
    policies: Vec<PolicyParams>,
    seeds: Vec<u64>,
    budget: usize,
) -> RunConfig {
    RunConfig {
        problem: ProblemSpec::Artificial {
            g_thr: -0.6,
            noise_std: vec![0.01],
        },
        grid: cego::harness::GridSpec::Uniform(100),
        kernel: Default::default(),
        policies: policies.into_iter().map(PolicySpec::new).collect(),
        beta: Default::default(),
        budget,
        seeds,
        initial_design: InitialDesign {
            feasible_start: true,
            uniform: None,
        },
        output_dir: dir.to_path_buf(),
        sigma_seed: cego::metrics::SIGMA_SEED,
        reference: None,
    }
}
