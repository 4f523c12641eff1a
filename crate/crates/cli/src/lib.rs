//! Batch front end: a TOML job in, a JSON report out.
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 a check failed,
//! 4 internal invariant violation.

// `!(x > 0.0)` style tests are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod tasks;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use config::{JobConfig, Task};
pub use error::CliError;
pub use report::{Check, Report};

use error::{EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Clone, Default, Parser)]
#[command(name = "heisenmeasure", version, about = "Intrinsic measures of submanifolds of the Heisenberg group")]
pub struct Args {
    /// Job configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Task to run; overrides `task` in the config.
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Root seed for all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker thread cap (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for closed-form checks.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    /// Serialized report, when one was produced.
    pub report: Option<String>,
    /// Where the report was written, if not stdout.
    pub written_to: Option<PathBuf>,
    pub message: Option<String>,
}

impl Outcome {
    fn failed(e: CliError) -> Self {
        Self {
            exit_code: e.exit_code(),
            report: None,
            written_to: None,
            message: Some(format!("error: {e}")),
        }
    }
}

/// Loads the config, applies command-line overrides and resolves the task.
pub fn prepare(args: &Args) -> Result<(Task, JobConfig), CliError> {
    let mut job = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            JobConfig::from_toml(&text)?
        }
        None => JobConfig::default(),
    };
    if job.n == 0 {
        job.n = 1;
    }
    if args.task.is_some() {
        job.task = args.task;
    }
    if args.seed.is_some() {
        job.seed = args.seed;
    }
    if let Some(t) = args.tolerance {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
        job.tolerance = Some(t);
    }
    if args.out.is_some() {
        job.output = args.out.clone();
    }
    job.seed = Some(job.effective_seed());
    let task = job
        .task
        .ok_or_else(|| CliError::Config("no task given (set `task` or pass --task)".into()))?;
    Ok((task, job))
}

/// Runs one job to completion. Never panics on bad input; all failures map to an
/// exit code.
pub fn run(args: &Args) -> Outcome {
    let (task, job) = match prepare(args) {
        Ok(v) => v,
        Err(e) => return Outcome::failed(e),
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return Outcome::failed(CliError::Internal(format!("thread pool: {e}"))),
    };
    let inputs = match serde_json::to_value(&job) {
        Ok(v) => v,
        Err(e) => return Outcome::failed(CliError::Internal(format!("echoing inputs: {e}"))),
    };
    let start = Instant::now();
    let out = match pool.install(|| tasks::run_task(task, &job)) {
        Ok(o) => o,
        Err(e) => return Outcome::failed(e),
    };
    let report = Report {
        task: task.name().to_string(),
        inputs,
        value: out.value,
        error_estimate: out.error_estimate,
        checks: out.checks,
        details: out.details,
        runtime_ms: start.elapsed().as_millis() as u64,
        seed: job.effective_seed(),
    };
    let text = match report.to_json() {
        Ok(t) => t,
        Err(e) => return Outcome::failed(e),
    };
    if let Some(path) = &job.output {
        if let Err(e) = std::fs::write(path, &text) {
            return Outcome::failed(CliError::Config(format!(
                "cannot write {}: {e}",
                path.display()
            )));
        }
    }
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    Outcome {
        exit_code: if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED },
        report: Some(text),
        written_to: job.output.clone(),
        message: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join("; "))),
    }
}
