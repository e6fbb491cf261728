use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::{BetaSchedule, PolicyKind};
use crate::benchmarks::{
    Artificial, ExternalBlackBox, ExternalConfig, Problem, WilliamsOtto, INFEASIBLE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::gp::{GpModel, Kernel, KernelFamily};
use crate::metrics::SIGMA_SEED;

/// Overrides `output_dir` when set.
pub const LOG_DIR_ENV: &str = "CEGO_LOG_DIR";

/// One experiment grid: every policy is run once per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Lattice points per axis, either one count for all axes or one per axis.
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub kernel: KernelSpec,
    pub policies: Vec<PolicySpec>,
    #[serde(default)]
    pub beta: BetaSchedule,
    /// Total evaluations per replication, initial design included.
    pub budget: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub initial_design: InitialDesign,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed of the uniform samples behind the σ normalizers.
    #[serde(default = "default_sigma_seed")]
    pub sigma_seed: u64,
    /// Reference optimum and normalizers, overriding the bundled ones.
    #[serde(default)]
    pub reference: Option<ReferenceOverride>,
}

fn default_grid() -> GridSpec {
    GridSpec::Uniform(100)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_sigma_seed() -> u64 {
    SIGMA_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl GridSpec {
    pub fn counts(&self, dim: usize) -> Vec<usize> {
        match self {
            GridSpec::Uniform(n) => vec![*n; dim],
            GridSpec::PerAxis(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Artificial {
        #[serde(default = "default_g_thr")]
        g_thr: f64,
        #[serde(default = "default_artificial_noise")]
        noise_std: Vec<f64>,
    },
    ArtificialInfeasible {
        #[serde(default = "default_artificial_noise")]
        noise_std: Vec<f64>,
    },
    WilliamsOtto {
        #[serde(default = "default_zero_noise")]
        noise_std: Vec<f64>,
    },
    External {
        #[serde(flatten)]
        config: ExternalConfig,
        #[serde(default = "default_zero_noise")]
        noise_std: Vec<f64>,
    },
}

fn default_g_thr() -> f64 {
    -0.6
}

fn default_artificial_noise() -> Vec<f64> {
    vec![0.01]
}

fn default_zero_noise() -> Vec<f64> {
    vec![0.0]
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        match self {
            ProblemSpec::Artificial { .. } => "artificial",
            ProblemSpec::ArtificialInfeasible { .. } => "artificial_infeasible",
            ProblemSpec::WilliamsOtto { .. } => "williams_otto",
            ProblemSpec::External { config, .. } => &config.name,
        }
    }

    pub fn noise_std(&self) -> &[f64] {
        match self {
            ProblemSpec::Artificial { noise_std, .. }
            | ProblemSpec::ArtificialInfeasible { noise_std }
            | ProblemSpec::WilliamsOtto { noise_std }
            | ProblemSpec::External { noise_std, .. } => noise_std,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Problem>> {
        Ok(match self {
            ProblemSpec::Artificial { g_thr, .. } => Box::new(Artificial::new(*g_thr)?),
            ProblemSpec::ArtificialInfeasible { .. } => Box::new(Artificial::infeasible()),
            ProblemSpec::WilliamsOtto { .. } => Box::new(WilliamsOtto::default()),
            ProblemSpec::External { config, .. } => {
                Box::new(ExternalBlackBox::new(config.clone())?)
            }
        })
    }

    /// Threshold of the artificial constraint, if this is an artificial problem.
    pub fn g_thr(&self) -> Option<f64> {
        match self {
            ProblemSpec::Artificial { g_thr, .. } => Some(*g_thr),
            ProblemSpec::ArtificialInfeasible { .. } => Some(INFEASIBLE_THRESHOLD),
            _ => None,
        }
    }
}

/// Kernel and noise variance for one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputKernel {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub output_scale: f64,
    pub noise_variance: f64,
}

impl OutputKernel {
    pub fn model(&self, output_index: usize) -> Result<GpModel<f64>> {
        let k = Kernel::new(self.family, self.lengthscales.clone(), self.output_scale)?;
        GpModel::new(k, self.noise_variance, output_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Built-in settings for the configured problem.
    #[default]
    Default,
    /// Fixed settings; a single entry applies to every output.
    Fixed { outputs: Vec<OutputKernel> },
    /// Refit by likelihood grid search after every observation once enough
    /// data is available; `initial` is used until then.
    Fit {
        family: KernelFamily,
        initial: Vec<OutputKernel>,
    },
}

impl KernelSpec {
    /// Initial per-output kernels for `problem` with `n_outputs` outputs.
    pub fn resolve(&self, problem: &ProblemSpec, n_outputs: usize) -> Result<Vec<OutputKernel>> {
        let list = match self {
            KernelSpec::Default => default_kernels(problem)?,
            KernelSpec::Fixed { outputs } => outputs.clone(),
            KernelSpec::Fit { initial, .. } => initial.clone(),
        };
        match list.len() {
            1 => Ok(vec![list[0].clone(); n_outputs]),
            n if n == n_outputs => Ok(list),
            n => Err(Error::Config(format!(
                "{n} kernel entries for {n_outputs} outputs"
            ))),
        }
    }

    pub fn refit_family(&self) -> Option<KernelFamily> {
        match self {
            KernelSpec::Fit { family, .. } => Some(*family),
            _ => None,
        }
    }
}

/// Built-in kernels. Lengthscales are a fixed fraction of the axis widths and
/// output scales are close to each output's spread over the box.
pub fn default_kernels(problem: &ProblemSpec) -> Result<Vec<OutputKernel>> {
    let se = |lengthscales: Vec<f64>, output_scale: f64, noise_variance: f64| OutputKernel {
        family: KernelFamily::SquaredExponential,
        lengthscales,
        output_scale,
        noise_variance,
    };
    match problem {
        ProblemSpec::Artificial { .. } | ProblemSpec::ArtificialInfeasible { .. } => {
            Ok(vec![se(vec![1.0, 1.0], 0.5, 1e-4)])
        }
        ProblemSpec::WilliamsOtto { .. } => Ok(vec![
            se(vec![1.0, 10.0], 50.0, 1e-4),
            se(vec![1.0, 10.0], 0.03, 1e-8),
            se(vec![1.0, 10.0], 0.03, 1e-8),
        ]),
        ProblemSpec::External { .. } => Err(Error::Config(
            "external problems need an explicit kernel specification".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyParams {
    Config,
    Cei,
    Epbo {
        rho: f64,
    },
    PrimalDual {
        #[serde(default = "default_eta")]
        eta: f64,
    },
    SafeOptLite {
        #[serde(default = "default_lipschitz")]
        lipschitz: f64,
        /// Seed points, snapped to the nearest lattice point. Defaults to the
        /// replication's feasible starting point.
        #[serde(default)]
        safe_seeds: Option<Vec<Vec<f64>>>,
    },
    Random,
}

fn default_eta() -> f64 {
    1.0
}

fn default_lipschitz() -> f64 {
    1.0
}

impl PolicyParams {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyParams::Config => PolicyKind::Config,
            PolicyParams::Cei => PolicyKind::Cei,
            PolicyParams::Epbo { .. } => PolicyKind::Epbo,
            PolicyParams::PrimalDual { .. } => PolicyKind::PrimalDual,
            PolicyParams::SafeOptLite { .. } => PolicyKind::SafeOptLite,
            PolicyParams::Random => PolicyKind::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    #[serde(flatten)]
    pub params: PolicyParams,
    /// Name of the log subdirectory and metric column; the policy name by
    /// default.
    #[serde(default)]
    pub label: Option<String>,
    /// Number of uniform initial points, overriding [`InitialDesign::uniform`].
    #[serde(default)]
    pub initial_uniform: Option<usize>,
}

impl PolicySpec {
    pub fn new(params: PolicyParams) -> Self {
        Self {
            params,
            label: None,
            initial_uniform: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.params.kind().name().to_string())
    }

    /// Uniform design size: the explicit override, else the config value,
    /// else 3 for CEI (which needs an incumbent) and 0 otherwise.
    pub fn uniform_points(&self, design: &InitialDesign) -> usize {
        self.initial_uniform
            .or(design.uniform)
            .unwrap_or(match self.params {
                PolicyParams::Cei => 3,
                _ => 0,
            })
    }
}

/// Points evaluated before the policy loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialDesign {
    /// Evaluate a rejection-sampled feasible lattice point first.
    #[serde(default)]
    pub feasible_start: bool,
    #[serde(default)]
    pub uniform: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceOverride {
    #[serde(default)]
    pub j_star: Option<f64>,
    #[serde(default)]
    pub sigmas: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no replication seeds".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("replication seeds must be distinct".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policies".into()));
        }
        let mut labels: Vec<String> = self.policies.iter().map(|p| p.label()).collect();
        for l in &labels {
            if l.is_empty()
                || !l
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))
            {
                return Err(Error::Config(format!("invalid policy label {l:?}")));
            }
        }
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("policy labels must be distinct".into()));
        }
        self.beta.validate()?;
        for p in &self.policies {
            match p.params {
                PolicyParams::Epbo { rho } if !(rho >= 0.0) => {
                    return Err(Error::Config("EPBO rho must be non-negative".into()))
                }
                PolicyParams::PrimalDual { eta } if !(eta > 0.0) => {
                    return Err(Error::Config("primal-dual eta must be positive".into()))
                }
                PolicyParams::SafeOptLite { lipschitz, .. } if !(lipschitz >= 0.0) => {
                    return Err(Error::Config(
                        "Lipschitz constant must be non-negative".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(LOG_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone())
    }
}
