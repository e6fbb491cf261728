//! Benchmark problems behind a single [`Problem`] abstraction.

mod artificial;
mod external;
mod problem;
mod williams_otto;

pub use artificial::{
    artificial_eval, artificial_infeasible_eval, Artificial, ARTIFICIAL_BOUND, INFEASIBLE_THRESHOLD,
};
pub use external::{ExternalBlackBox, ExternalConfig};
pub use problem::{grid_optimum, Measurement, NoisyProblem, Problem, ProblemOptimum};
pub use williams_otto::{
    cstr_steady_state, williams_otto_eval, CstrConstants, CstrModel, CstrState, WilliamsOtto,
};
