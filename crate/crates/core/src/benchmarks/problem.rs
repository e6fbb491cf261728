use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::Domain;

/// Black-box constrained problem `min J(θ)` s.t. `g_i(θ) ≤ 0`.
pub trait Problem: Send {
    fn name(&self) -> &str;

    fn lower(&self) -> &[f64];

    fn upper(&self) -> &[f64];

    fn n_constraints(&self) -> usize;

    /// Noise-free outputs `[J, g_1, …, g_N]`.
    fn evaluate(&mut self, theta: &[f64]) -> Result<Vec<f64>>;

    /// Whether [`evaluate`](Self::evaluate) is a deterministic function of
    /// `θ`, so that its values can serve as ground truth for metrics.
    fn is_pure(&self) -> bool {
        true
    }

    fn dim(&self) -> usize {
        self.lower().len()
    }

    fn domain(&self, grid_counts: Vec<usize>) -> Result<Domain<f64>> {
        Domain::new(self.lower().to_vec(), self.upper().to_vec(), grid_counts)
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn lower(&self) -> &[f64] {
        (**self).lower()
    }
    fn upper(&self) -> &[f64] {
        (**self).upper()
    }
    fn n_constraints(&self) -> usize {
        (**self).n_constraints()
    }
    fn evaluate(&mut self, theta: &[f64]) -> Result<Vec<f64>> {
        (**self).evaluate(theta)
    }
    fn is_pure(&self) -> bool {
        (**self).is_pure()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub measured: Vec<f64>,
    /// Noise-free values, present only for pure problems.
    pub truth: Option<Vec<f64>>,
}

/// Adds seeded Gaussian measurement noise to a problem's outputs.
///
/// One standard normal is drawn per output on every call, also when the
/// standard deviation is zero, so the noise stream stays aligned across
/// configurations.
pub struct NoisyProblem<P> {
    problem: P,
    noise_std: Vec<f64>,
}

impl<P: Problem> NoisyProblem<P> {
    pub fn new(problem: P, noise_std: Vec<f64>) -> Result<Self> {
        let outputs = problem.n_constraints() + 1;
        let noise_std = match noise_std.len() {
            1 => vec![noise_std[0]; outputs],
            n if n == outputs => noise_std,
            n => {
                return Err(Error::Config(format!(
                    "{n} noise levels for {outputs} outputs"
                )))
            }
        };
        if noise_std.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config(
                "noise std must be finite and non-negative".into(),
            ));
        }
        Ok(Self { problem, noise_std })
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn problem_mut(&mut self) -> &mut P {
        &mut self.problem
    }

    pub fn noise_std(&self) -> &[f64] {
        &self.noise_std
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, theta: &[f64], rng: &mut R) -> Result<Measurement> {
        let truth = self.problem.evaluate(theta)?;
        let measured = self.perturb(&truth, rng);
        Ok(Measurement {
            measured,
            truth: self.problem.is_pure().then_some(truth),
        })
    }

    /// Applies one noise draw to `values`.
    pub fn perturb<R: Rng + ?Sized>(&self, values: &[f64], rng: &mut R) -> Vec<f64> {
        values
            .iter()
            .zip(&self.noise_std)
            .map(|(v, s)| {
                let z: f64 = rng.sample(StandardNormal);
                if *s == 0.0 {
                    *v
                } else {
                    v + s * z
                }
            })
            .collect()
    }
}

/// Feasible minimum of a pure problem over a dense lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemOptimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub grid: Vec<usize>,
}

/// Brute-force feasible minimum over the lattice of `grid` points per axis.
/// `None` when no lattice point is feasible.
pub fn grid_optimum<F>(
    lower: &[f64],
    upper: &[f64],
    grid: &[usize],
    eval: F,
) -> Result<Option<ProblemOptimum>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let domain = Domain::new(lower.to_vec(), upper.to_vec(), grid.to_vec())?;
    let best = (0..domain.len())
        .into_par_iter()
        .map(|i| -> Result<Option<(f64, usize)>> {
            let p = domain.point(i);
            let v = eval(&p)?;
            Ok(v[1..].iter().all(|g| *g <= 0.0).then_some((v[0], i)))
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
                    (x, None) => x,
                    (None, y) => y,
                })
            },
        )?;
    Ok(best.map(|(value, i)| ProblemOptimum {
        value,
        argmin: domain.point(i).0,
        grid: grid.to_vec(),
    }))
}
