//! Brute-force reference values: constrained optima and σ normalizers.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::config::ProblemSpec;
use crate::benchmarks::{grid_optimum, Artificial, Problem, WilliamsOtto};
use crate::error::{Error, Result};
use crate::metrics::{sigma_normalizers, SIGMA_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReference {
    /// Constraint threshold the values were computed for, where relevant.
    #[serde(default)]
    pub g_thr: Option<f64>,
    pub j_star: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    pub optimum_grid: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub sigma_grid: Vec<usize>,
    pub sigma_seed: u64,
    pub sigma_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub version: u32,
    pub problems: BTreeMap<String, ProblemReference>,
}

impl Default for ReferenceFile {
    fn default() -> Self {
        Self {
            version: 1,
            problems: BTreeMap::new(),
        }
    }
}

impl ReferenceFile {
    /// The reference values shipped with the crate.
    pub fn bundled() -> &'static ReferenceFile {
        static CELL: OnceLock<ReferenceFile> = OnceLock::new();
        CELL.get_or_init(|| {
            serde_json::from_str(include_str!("../../data/reference.json"))
                .expect("bundled reference.json is valid")
        })
    }

    /// Entry for `spec`, if one exists with a matching threshold.
    pub fn lookup(&self, spec: &ProblemSpec) -> Option<&ProblemReference> {
        self.problems
            .get(spec.name())
            .filter(|r| r.g_thr == spec.g_thr())
    }
}

/// Noise-free evaluation closure for a pure problem.
pub fn pure_oracle(spec: &ProblemSpec) -> Result<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync>> {
    match spec {
        ProblemSpec::Artificial { g_thr, .. } => {
            let a = Artificial::new(*g_thr)?;
            Ok(Box::new(move |t: &[f64]| a.eval(t)))
        }
        ProblemSpec::ArtificialInfeasible { .. } => {
            let a = Artificial::infeasible();
            Ok(Box::new(move |t: &[f64]| a.eval(t)))
        }
        ProblemSpec::WilliamsOtto { .. } => {
            let w = WilliamsOtto::default();
            Ok(Box::new(move |t: &[f64]| w.eval(t)))
        }
        ProblemSpec::External { config, .. } => Err(Error::Config(format!(
            "{} is not a pure problem; no reference can be computed",
            config.name
        ))),
    }
}

/// Sample σ of every output over `samples` seeded uniform draws of the
/// `grid` lattice.
pub fn compute_sigmas(
    spec: &ProblemSpec,
    grid: &[usize],
    seed: u64,
    samples: usize,
) -> Result<Vec<f64>> {
    let oracle = pure_oracle(spec)?;
    let domain = spec.build()?.domain(grid.to_vec())?;
    sigma_normalizers(&domain, samples, seed, oracle)
}

/// Dense-grid optimum and σ normalizers for a pure problem.
pub fn compute_reference(
    spec: &ProblemSpec,
    optimum_grid: &[usize],
    sigma_grid: &[usize],
    sigma_seed: u64,
) -> Result<ProblemReference> {
    let problem = spec.build()?;
    let oracle = pure_oracle(spec)?;
    let optimum = grid_optimum(problem.lower(), problem.upper(), optimum_grid, &oracle)?;
    let sigmas = compute_sigmas(spec, sigma_grid, sigma_seed, SIGMA_SAMPLES)?;
    Ok(ProblemReference {
        g_thr: spec.g_thr(),
        j_star: optimum.as_ref().map(|o| o.value),
        argmin: optimum.map(|o| o.argmin),
        optimum_grid: optimum_grid.to_vec(),
        sigmas,
        sigma_grid: sigma_grid.to_vec(),
        sigma_seed,
        sigma_samples: SIGMA_SAMPLES,
    })
}
