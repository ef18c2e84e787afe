//! `dvdm`: run simulations, convergence sweeps and property checks.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 solver failure
//! (partial output is still written), 3 property check failure.

mod config;
mod output;

use std::env;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use dvdm_core::analysis::{convergence_study, trig_interpolant, LevelStatus, Reference};
use dvdm_core::checks::{run_checks, CheckConfig, Scope, DEFAULT_SEED};
use dvdm_core::solver::{simulate, GuardStatus};
use dvdm_core::Error;

use config::Setup;

const THREADS_VAR: &str = "DVDM_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "dvdm",
    version,
    about = "Energy-conservative schemes for KdV-type equations"
)]
struct Cli {
    /// Seed for the randomized property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write diagnostics.
    Run { config: PathBuf },
    /// Convergence study: halve dx and dt together `levels - 1` times.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Randomized property suites: operators, invariants, bounds or all.
    Check { scope: String },
}

/// Everything that ends a command early.
#[derive(Debug)]
pub enum Failure {
    Config {
        field: String,
        message: String,
    },
    Guard {
        dt: f64,
        eps1: f64,
        eps2: f64,
        message: String,
    },
    Io(String),
    Solver {
        step: usize,
        kind: &'static str,
        message: String,
    },
    Checks {
        failed: usize,
    },
}

impl Failure {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Failure::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config { .. } | Failure::Guard { .. } | Failure::Io(_) => 1,
            Failure::Solver { .. } => 2,
            Failure::Checks { .. } => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Config { field, message } => {
                json!({"error": "config", "field": field, "message": message})
            }
            Failure::Guard {
                dt,
                eps1,
                eps2,
                message,
            } => json!({
                "error": "guard_violation",
                "dt": dt,
                "eps1": eps1,
                "eps2": eps2,
                "message": message,
            }),
            Failure::Io(message) => json!({"error": "io", "message": message}),
            Failure::Solver {
                step,
                kind,
                message,
            } => json!({"error": kind, "step": step, "message": message}),
            Failure::Checks { failed } => {
                json!({"error": "check_failed", "failed": failed})
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation { field, reason } => Failure::Config {
                field: field.to_string(),
                message: format!("invalid {field}: {reason}"),
            },
            Error::GuardViolation { dt, eps1, eps2 } => Failure::Guard {
                dt,
                eps1,
                eps2,
                message: e.to_string(),
            },
            other => Failure::Solver {
                step: 0,
                kind: other.kind(),
                message: other.to_string(),
            },
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let quiet = cli.quiet;
    let result = match cli.command {
        Command::Run { config } => run(&config, quiet),
        Command::Sweep { config, levels } => sweep(&config, levels, quiet),
        Command::Check { scope } => check(&scope, cli.seed.unwrap_or(DEFAULT_SEED), quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !matches!(f, Failure::Checks { .. }) || !quiet {
                eprintln!("{}", f.to_json());
            }
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(path: &Path, quiet: bool) -> Result<(), Failure> {
    let setup = Setup::load(path)?;
    let diag_path = setup
        .outputs
        .diagnostics_path
        .clone()
        .ok_or_else(|| Failure::config("outputs.diagnostics_path", "required for run"))?;

    let (series, failure) = match simulate(&setup.spec, &setup.grid, &setup.initial, &setup.solver)
    {
        Ok(ts) => (ts, None),
        Err(e) => {
            if e.partial.diags.is_empty() {
                // nothing computed: a setup problem such as the step guard
                if let f @ (Failure::Config { .. } | Failure::Guard { .. }) =
                    Failure::from(e.source.clone())
                {
                    return Err(f);
                }
            }
            let f = Failure::Solver {
                step: e.step,
                kind: e.source.kind(),
                message: e.to_string(),
            };
            (*e.partial, Some(f))
        }
    };

    output::write_diagnostics(&diag_path, setup.outputs.format, &series)
        .map_err(|e| io_failure(&diag_path, e))?;
    if let Some(p) = &setup.outputs.timeseries_path {
        output::write_snapshots(p, &series, setup.outputs.state_stride)
            .map_err(|e| io_failure(p, e))?;
    }
    if let Some(GuardStatus::Warning(b)) = series.diags.first().map(|d| d.guard) {
        if !quiet {
            eprintln!(
                "warning: dt = {} is outside the contraction bounds (eps1 = {}, eps2 = {}); proceeding",
                output::num(setup.grid.dt()),
                output::num(b.eps1),
                output::num(b.eps2)
            );
        }
    }
    if let Some(f) = failure {
        return Err(f);
    }
    if !quiet {
        println!(
            "run: {} K={} M={} completed; mass drift {:.2e}, energy drift {:.2e}, max sup {:.6}",
            setup.spec.name(),
            setup.grid.nodes(),
            setup.grid.steps(),
            series.mass_drift(),
            series.energy_drift(),
            series.max_sup_norm()
        );
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::config(
                THREADS_VAR,
                format!("expected a positive integer, got '{v}'"),
            )
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::config(THREADS_VAR, e.to_string()))
}

fn sweep(path: &Path, levels: usize, quiet: bool) -> Result<(), Failure> {
    if levels < 2 {
        return Err(Failure::config(
            "levels",
            format!("need at least 2, got {levels}"),
        ));
    }
    let setup = Setup::load(path)?;
    let reference = match &setup.exact {
        Some(exact) => Reference::Exact(exact.clone()),
        None => {
            let finest = setup.grid.nodes() << (levels - 1);
            let u0 = trig_interpolant(&setup.initial, setup.grid.length());
            Reference::spectral(u0, (4 * finest).next_power_of_two())
        }
    };
    let pool = thread_pool()?;
    let table = pool.install(|| {
        convergence_study(&setup.spec, &reference, &setup.grid, levels, &setup.solver)
    })?;

    match &setup.outputs.table_path {
        Some(p) => {
            output::write_table_file(p, &table).map_err(|e| io_failure(p, e))?;
            if !quiet {
                output::write_table(&mut io::stdout().lock(), &table)
                    .map_err(|e| Failure::Io(e.to_string()))?;
            }
        }
        None => {
            output::write_table(&mut io::stdout().lock(), &table)
                .map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    let failed: Vec<(usize, usize, usize)> = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(j, r)| match r.status {
            LevelStatus::Failed { step, .. } => Some((j, r.nodes, step)),
            LevelStatus::Converged => None,
        })
        .collect();
    if let Some(&(j, nodes, step)) = failed.first() {
        return Err(Failure::Solver {
            step,
            kind: "level_failed",
            message: format!(
                "{} of {levels} levels failed, first at level {j} (K = {nodes})",
                failed.len()
            ),
        });
    }
    Ok(())
}

fn check(scope: &str, seed: u64, quiet: bool) -> Result<(), Failure> {
    let scope: Scope = scope.parse()?;
    let outcomes = run_checks(scope, &CheckConfig::with_seed(seed));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut out = io::stdout().lock();
    for o in &outcomes {
        if !quiet || !o.passed {
            writeln!(out, "{o}").map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    if !quiet {
        writeln!(
            out,
            "check {scope} seed={seed}: {} of {} properties passed",
            outcomes.len() - failed,
            outcomes.len()
        )
        .map_err(|e| Failure::Io(e.to_string()))?;
    }
    if failed > 0 {
        return Err(Failure::Checks { failed });
    }
    Ok(())
}
