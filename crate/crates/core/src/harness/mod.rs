//! Experiment orchestration: configs, replications, logs and metric tables.

mod config;
mod log;
mod reference;
mod report;
mod runner;

pub use config::{
    default_kernels, GridSpec, InitialDesign, KernelSpec, OutputKernel, PolicyParams, PolicySpec,
    ProblemSpec, ReferenceOverride, RunConfig, LOG_DIR_ENV,
};
pub use log::{discover_logs, read_records, InitialPoints, LogPaths, RunHeader, RunLog};
pub use reference::{
    compute_reference, compute_sigmas, pure_oracle, ProblemReference, ReferenceFile,
};
pub use report::{emit_metrics, log_series, MetricKind, MetricTable};
pub use runner::{
    feasible_start_sampler, run_experiment, ReplicationOutcome, ReplicationSummary, MAX_REJECTIONS,
};
