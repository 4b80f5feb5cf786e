use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rrdo_lab::{parse_config, run, ExperimentKind, LabError};

/// Seeded Monte Carlo experiments over random reduced dynamics operators.
#[derive(Debug, Parser)]
#[command(name = "rrdo-lab", version)]
struct Cli {
    /// Experiment to run; must match the `experiment` field of the config.
    experiment: ExperimentKind,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "RRDO_LAB_THREADS")]
    threads: Option<NonZeroUsize>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return usage(format_args!("{}: {}", cli.config.display(), e)),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return usage(format_args!("{}: {}", cli.config.display(), e)),
    };
    if cfg.experiment != cli.experiment {
        return usage(format_args!(
            "command line names experiment `{}` but {} configures `{}`",
            cli.experiment,
            cli.config.display(),
            cfg.experiment
        ));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    let threads = cli
        .threads
        .or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get);

    match run(&cfg, threads) {
        Ok(report) => {
            for v in &report.verdicts {
                println!("{}", v.line());
            }
            if let Some(e) = &report.error {
                println!("ERROR {}", e);
            }
            println!(
                "{} trace rows, summary in {}",
                report.trace_rows,
                cfg.output_dir.join(rrdo_lab::SUMMARY_FILE).display()
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ LabError::Config(_)) => usage(e),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
