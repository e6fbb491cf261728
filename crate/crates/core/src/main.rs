use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cego::harness::{
    compute_reference, discover_logs, emit_metrics, run_experiment, GridSpec, MetricKind,
    ProblemSpec, ReferenceFile, RunConfig,
};
use cego::metrics::SIGMA_SEED;

#[derive(Parser)]
#[command(
    name = "cego",
    version,
    about = "Constrained efficient global optimization benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every policy and seed of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate a metric over the logs in a directory into a CSV table.
    Metrics {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force reference optimum and σ normalizers of a pure problem.
    Oracle {
        /// artificial, artificial_infeasible or williams_otto
        #[arg(long)]
        problem: String,
        /// Points per axis of the optimum search lattice.
        #[arg(long)]
        grid: usize,
        /// Points per axis of the lattice sampled for the normalizers.
        #[arg(long, default_value_t = 100)]
        sigma_grid: usize,
        #[arg(long, default_value_t = SIGMA_SEED)]
        sigma_seed: u64,
        #[arg(long, allow_hyphen_values = true)]
        g_thr: Option<f64>,
        /// Reference file to create or update.
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in benchmark problems.
    ListProblems,
}

fn problem_spec(name: &str, g_thr: Option<f64>) -> Result<ProblemSpec, String> {
    let json = match name {
        "artificial" => serde_json::json!({ "kind": "artificial", "g_thr": g_thr.unwrap_or(-0.6) }),
        "artificial_infeasible" | "williams_otto" => serde_json::json!({ "kind": name }),
        other => return Err(format!("unknown problem {other:?}")),
    };
    serde_json::from_value(json).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Cmd::Run { config, jobs } => {
            let config = RunConfig::from_path(&config).map_err(|e| e.to_string())?;
            let outcomes = run_experiment(&config, jobs).map_err(|e| e.to_string())?;
            let mut failed = 0;
            for o in &outcomes {
                match &o.result {
                    Ok(s) => println!(
                        "{} seed {}: {} records{}{}",
                        o.label,
                        o.seed,
                        s.records,
                        if s.replayed > 0 {
                            format!(" ({} replayed)", s.replayed)
                        } else {
                            String::new()
                        },
                        if s.infeasible {
                            ", declared infeasible"
                        } else {
                            ""
                        },
                    ),
                    Err(e) => {
                        failed += 1;
                        eprintln!(
                            "{} seed {}: {e} (log kept at {})",
                            o.label,
                            o.seed,
                            o.log.display()
                        );
                    }
                }
            }
            if failed > 0 {
                return Err(format!(
                    "{failed} of {} replications failed",
                    outcomes.len()
                ));
            }
            Ok(())
        }
        Cmd::Metrics { logs, metric, out } => {
            let logs = discover_logs(&logs).map_err(|e| e.to_string())?;
            if logs.is_empty() {
                return Err("no run logs found".into());
            }
            let table = emit_metrics(&logs, metric).map_err(|e| e.to_string())?;
            table.write_csv(&out).map_err(|e| e.to_string())?;
            println!(
                "wrote {} steps for {} policies to {}",
                table.steps(),
                table.labels.len(),
                out.display()
            );
            Ok(())
        }
        Cmd::Oracle {
            problem,
            grid,
            sigma_grid,
            sigma_seed,
            g_thr,
            out,
        } => {
            let spec = problem_spec(&problem, g_thr)?;
            let dim = spec.build().map_err(|e| e.to_string())?.lower().len();
            let r = compute_reference(
                &spec,
                &GridSpec::Uniform(grid).counts(dim),
                &GridSpec::Uniform(sigma_grid).counts(dim),
                sigma_seed,
            )
            .map_err(|e| e.to_string())?;
            let mut file = match std::fs::read_to_string(&out) {
                Ok(text) => serde_json::from_str(&text).map_err(|e| e.to_string())?,
                Err(_) => ReferenceFile::default(),
            };
            println!(
                "{}: J* = {:?} at {:?}, sigmas {:?}",
                problem, r.j_star, r.argmin, r.sigmas
            );
            file.problems.insert(spec.name().to_string(), r);
            let text = serde_json::to_string_pretty(&file).map_err(|e| e.to_string())?;
            std::fs::write(&out, text + "\n").map_err(|e| e.to_string())?;
            Ok(())
        }
        Cmd::ListProblems => {
            println!("artificial             cos(2a)cos(b) + sin(a) s.t. cos(a+b) <= g_thr on [-10,10]^2");
            println!("artificial_infeasible  same objective with g_thr = -2 (no feasible point)");
            println!("williams_otto          Williams-Otto CSTR, theta = (F_B, T_r), two purity constraints");
            println!("external               any program speaking the JSON line protocol");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
