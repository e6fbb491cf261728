use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{OutputKernel, PolicyParams, PolicySpec, RunConfig};
use super::log::{ensure_header, read_records, InitialPoints, LogPaths, LogWriter, RunHeader};
use super::reference::{compute_sigmas, ReferenceFile};
use crate::acquisition::{AlgorithmState, Decision, PolicyState, SafeSet};
use crate::benchmarks::{NoisyProblem, Problem};
use crate::error::{Error, Result};
use crate::gp::{fit_hyperparameters, Domain, KernelFamily, ParameterVector, MIN_OBSERVATIONS};
use crate::metrics::{RunRecord, ValueSource, SIGMA_SAMPLES};

/// Rejections before [`feasible_start_sampler`] gives up.
pub const MAX_REJECTIONS: usize = 100_000;

// independent random streams of one replication
const STREAM_START: u64 = 0;
const STREAM_DESIGN: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_POLICY: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniformly drawn lattice point whose noise-free constraints are all `≤ 0`.
pub fn feasible_start_sampler<P, R>(
    problem: &mut P,
    domain: &Domain<f64>,
    rng: &mut R,
) -> Result<ParameterVector<f64>>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    for _ in 0..MAX_REJECTIONS {
        let p = domain.point(rng.random_range(0..domain.len()));
        let v = problem.evaluate(&p)?;
        if v[1..].iter().all(|g| *g <= 0.0) {
            return Ok(p);
        }
    }
    Err(Error::NoFeasibleStart(MAX_REJECTIONS))
}

/// Result of one (policy, seed) replication.
#[derive(Debug)]
pub struct ReplicationOutcome {
    pub label: String,
    pub seed: u64,
    pub log: PathBuf,
    pub result: Result<ReplicationSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub records: usize,
    /// Records taken over from an existing log.
    pub replayed: usize,
    pub infeasible: bool,
}

/// Settings shared by all replications of an experiment.
struct Experiment<'a> {
    config: &'a RunConfig,
    output_dir: PathBuf,
    grid: Vec<usize>,
    kernels: Vec<OutputKernel>,
    refit: Option<KernelFamily>,
    j_star: Option<(f64, Vec<usize>)>,
    sigmas: Option<Vec<f64>>,
    value_source: ValueSource,
}

impl<'a> Experiment<'a> {
    fn new(config: &'a RunConfig) -> Result<Self> {
        config.validate()?;
        let probe = config.problem.build()?;
        let n_outputs = probe.n_constraints() + 1;
        let grid = config.grid.counts(probe.dim());
        probe.domain(grid.clone())?;
        let kernels = config.kernel.resolve(&config.problem, n_outputs)?;
        for k in &kernels {
            k.model(0)?;
            if k.lengthscales.len() != probe.dim() {
                return Err(Error::DimensionMismatch {
                    expected: probe.dim(),
                    got: k.lengthscales.len(),
                });
            }
        }
        let pure = probe.is_pure();
        drop(probe);

        let bundled = ReferenceFile::bundled().lookup(&config.problem);
        let over = config.reference.as_ref();
        let j_star = match over.and_then(|o| o.j_star) {
            Some(j) => Some((j, vec![])),
            None => bundled.and_then(|r| r.j_star.map(|j| (j, r.optimum_grid.clone()))),
        };
        let sigmas = match over.and_then(|o| o.sigmas.clone()) {
            Some(s) => Some(s),
            None => match bundled {
                Some(r) if r.sigma_grid == grid && r.sigma_seed == config.sigma_seed => {
                    Some(r.sigmas.clone())
                }
                _ if pure => Some(compute_sigmas(
                    &config.problem,
                    &grid,
                    config.sigma_seed,
                    SIGMA_SAMPLES,
                )?),
                _ => None,
            },
        };
        Ok(Self {
            config,
            output_dir: config.resolved_output_dir(),
            grid,
            kernels,
            refit: config.kernel.refit_family(),
            j_star,
            sigmas,
            value_source: if pure {
                ValueSource::True
            } else {
                ValueSource::Measured
            },
        })
    }

    fn header(
        &self,
        policy: &PolicySpec,
        seed: u64,
        start: Option<&ParameterVector<f64>>,
    ) -> RunHeader {
        RunHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            problem: self.config.problem.clone(),
            label: policy.label(),
            policy: policy.clone(),
            seed,
            budget: self.config.budget,
            grid: self.grid.clone(),
            beta: self.config.beta,
            kernels: self.kernels.clone(),
            kernel_refit: self.refit,
            initial_design: InitialPoints {
                feasible_start: start.map(|p| p.0.clone()),
                uniform: policy.uniform_points(&self.config.initial_design),
            },
            j_star: self.j_star.as_ref().map(|j| j.0),
            j_star_grid: self.j_star.as_ref().map(|j| j.1.clone()),
            sigmas: self.sigmas.clone(),
            sigma_seed: self.config.sigma_seed,
            value_source: self.value_source,
        }
    }
}

/// Measurement source for one replication: replays logged records while
/// they last, then evaluates the problem and appends.
struct Recorder {
    problem: NoisyProblem<Box<dyn Problem>>,
    noise: ChaCha8Rng,
    existing: Vec<RunRecord>,
    writer: LogWriter,
    t: usize,
    replayed: usize,
}

impl Recorder {
    fn next_logged(&self) -> Option<&RunRecord> {
        self.existing.get(self.t)
    }

    fn sample(&mut self, theta: &ParameterVector<f64>) -> Result<Vec<f64>> {
        let t = self.t + 1;
        if let Some(rec) = self.next_logged() {
            if rec.t != t || !rec.is_sample() || rec.theta != theta.0 {
                return Err(Error::ReplayMismatch(t));
            }
            let y = rec.y.clone();
            // keep the noise stream where a fresh evaluation would leave it
            self.problem.perturb(&y, &mut self.noise);
            self.t = t;
            self.replayed += 1;
            return Ok(y);
        }
        let clock = Instant::now();
        let m = self.problem.measure(theta, &mut self.noise)?;
        let record = RunRecord::sample(t, theta.0.clone(), m.measured.clone(), m.truth);
        self.writer.write(&record)?;
        self.writer.write_timing(t, clock.elapsed().as_secs_f64())?;
        self.t = t;
        Ok(m.measured)
    }

    fn infeasible(&mut self) -> Result<()> {
        let t = self.t + 1;
        match self.next_logged() {
            Some(rec) if rec.t == t && !rec.is_sample() => {
                self.replayed += 1;
            }
            Some(_) => return Err(Error::ReplayMismatch(t)),
            None => self.writer.write(&RunRecord::infeasible(t))?,
        }
        self.t = t;
        Ok(())
    }
}

fn policy_state(
    params: &PolicyParams,
    domain: &Domain<f64>,
    n_constraints: usize,
    start: Option<&ParameterVector<f64>>,
    seed: u64,
) -> Result<PolicyState<f64>> {
    Ok(match params {
        PolicyParams::Config => PolicyState::Config,
        PolicyParams::Cei => PolicyState::Cei,
        PolicyParams::Epbo { rho } => PolicyState::Epbo { penalty: *rho },
        PolicyParams::PrimalDual { eta } => PolicyState::PrimalDual {
            duals: vec![0.0; n_constraints],
            step_size: *eta,
        },
        PolicyParams::SafeOptLite {
            lipschitz,
            safe_seeds,
        } => {
            let seeds = match safe_seeds {
                Some(points) => points
                    .iter()
                    .map(|p| domain.nearest_index(p))
                    .collect::<Result<Vec<_>>>()?,
                None => {
                    let s = start.ok_or_else(|| {
                        Error::Config("safe_opt_lite needs safe_seeds or a feasible start".into())
                    })?;
                    vec![domain.nearest_index(s)?]
                }
            };
            PolicyState::SafeOptLite(SafeSet::new(domain.len(), &seeds, *lipschitz)?)
        }
        PolicyParams::Random => PolicyState::Random(stream(seed, STREAM_POLICY)),
    })
}

fn refit_models(state: &mut AlgorithmState<f64>, family: KernelFamily) -> Result<()> {
    let domain = state.domain().clone();
    for m in state.models_mut() {
        if m.len() >= MIN_OBSERVATIONS {
            let obs: Vec<_> = m.observations().collect();
            let h = fit_hyperparameters(&obs, &domain, family)?;
            m.set_hyperparameters(h.kernel, h.noise_variance)?;
        }
    }
    Ok(())
}

fn run_replication(
    exp: &Experiment,
    policy: &PolicySpec,
    seed: u64,
    paths: &LogPaths,
) -> Result<ReplicationSummary> {
    let config = exp.config;
    let mut problem =
        NoisyProblem::new(config.problem.build()?, config.problem.noise_std().to_vec())?;
    let domain = problem.problem().domain(exp.grid.clone())?;
    let n_constraints = problem.problem().n_constraints();
    let (existing, keep) = read_records(&paths.log)?;

    let wants_start = config.initial_design.feasible_start
        || matches!(
            policy.params,
            PolicyParams::SafeOptLite {
                safe_seeds: None,
                ..
            }
        );
    let start = if !wants_start {
        None
    } else if !problem.problem().is_pure()
        && config.initial_design.feasible_start
        && !existing.is_empty()
    {
        // an impure oracle is not re-queried for points already on record
        Some(ParameterVector(existing[0].theta.clone()))
    } else {
        let mut rng = stream(seed, STREAM_START);
        Some(feasible_start_sampler(
            problem.problem_mut(),
            &domain,
            &mut rng,
        )?)
    };

    std::fs::create_dir_all(paths.log.parent().unwrap_or(Path::new(".")))?;
    ensure_header(&paths.header, &exp.header(policy, seed, start.as_ref()))?;

    let mut initial = Vec::new();
    if config.initial_design.feasible_start {
        initial.extend(start.clone());
    }
    let mut design_rng = stream(seed, STREAM_DESIGN);
    for _ in 0..policy.uniform_points(&config.initial_design) {
        initial.push(domain.point(design_rng.random_range(0..domain.len())));
    }

    let models = exp
        .kernels
        .iter()
        .enumerate()
        .map(|(i, k)| k.model(i))
        .collect::<Result<Vec<_>>>()?;
    let ps = policy_state(&policy.params, &domain, n_constraints, start.as_ref(), seed)?;
    let mut state = AlgorithmState::new(domain, models, config.beta, ps)?;
    let mut rec = Recorder {
        problem,
        noise: stream(seed, STREAM_NOISE),
        existing,
        writer: LogWriter::open(paths, keep)?,
        t: 0,
        replayed: 0,
    };

    let absorb = |state: &mut AlgorithmState<f64>,
                  rec: &mut Recorder,
                  theta: &ParameterVector<f64>|
     -> Result<()> {
        let y = rec.sample(theta)?;
        state.observe(theta, &y)?;
        if let Some(family) = exp.refit {
            refit_models(state, family)?;
        }
        Ok(())
    };

    let mut infeasible = false;
    for theta in initial.iter().take(config.budget) {
        absorb(&mut state, &mut rec, theta)?;
    }
    while rec.t < config.budget {
        match state.next_decision()? {
            Decision::Infeasible => {
                rec.infeasible()?;
                infeasible = true;
                break;
            }
            Decision::Sample { theta, .. } => absorb(&mut state, &mut rec, &theta)?,
        }
    }
    Ok(ReplicationSummary {
        records: rec.t,
        replayed: rec.replayed,
        infeasible,
    })
}

/// Runs every (policy, seed) pair of `config` on `jobs` worker threads
/// (all available cores when `None`). Replication failures are reported in
/// the outcomes; only configuration errors abort the whole experiment.
pub fn run_experiment(config: &RunConfig, jobs: Option<usize>) -> Result<Vec<ReplicationOutcome>> {
    let exp = Experiment::new(config)?;
    let tasks: Vec<(&PolicySpec, u64)> = config
        .policies
        .iter()
        .flat_map(|p| config.seeds.iter().map(move |s| (p, *s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|(policy, seed)| {
                let label = policy.label();
                let paths = LogPaths::new(&exp.output_dir, &label, *seed);
                let result = run_replication(&exp, policy, *seed, &paths);
                ReplicationOutcome {
                    label,
                    seed: *seed,
                    log: paths.log,
                    result,
                }
            })
            .collect()
    }))
}
