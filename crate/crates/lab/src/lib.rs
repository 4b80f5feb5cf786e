//! Seeded Monte Carlo experiments over random reduced dynamics operators.
//!
//! A run reads an [`ExperimentConfig`], fans trajectories out over a rayon
//! pool (trajectory `i` draws from `RngStream::new(seed, i)`), and writes
//! `trace.csv` and `summary.json` into the output directory.

pub mod config;
mod experiments;
pub mod report;
pub mod trace;

use std::fs;
use std::time::Instant;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use report::{RunReport, Runtime, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] rrdo_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("summary: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Runs one experiment on `threads` workers and writes its outputs.
///
/// Numerical failures inside the experiment do not abort the run: they are
/// recorded in [`RunReport::error`] and the report is still written.
pub fn run(config: &ExperimentConfig, threads: usize) -> Result<RunReport, LabError> {
    let cfg = config.clone().validate()?;
    let started = Instant::now();
    let ensemble = cfg.ensemble.build(cfg.tol("cluster"))?;
    fs::create_dir_all(&cfg.output_dir)?;
    let trace_path = cfg.output_dir.join(TRACE_FILE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?;

    let mut ctx = experiments::Ctx::new(&cfg, ensemble, &trace_path);
    log::info!(
        "{}: {} trajectories x {} steps, seed {}, {} threads",
        cfg.experiment,
        cfg.trajectories,
        cfg.steps,
        cfg.seed,
        threads
    );
    let error = match pool.install(|| experiments::dispatch(&mut ctx)) {
        Ok(()) => None,
        Err(LabError::Numerical(e)) => {
            log::error!("{}", e);
            Some(e.to_string())
        }
        Err(e) => return Err(e),
    };
    let trace_rows = ctx.finish_trace()?;
    let report = RunReport {
        experiment: cfg.experiment.name().to_string(),
        input_hash: report::input_hash(&cfg),
        verdicts: ctx.verdicts,
        metrics: ctx.metrics,
        trace_rows,
        error,
        runtime: Runtime {
            wall_seconds: started.elapsed().as_secs_f64(),
            threads,
        },
        config: cfg.clone(),
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(cfg.output_dir.join(SUMMARY_FILE), json)?;
    Ok(report)
}
