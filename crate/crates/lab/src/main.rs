use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gdnls::Execution;
use gdnls_lab::{run_in, run_sweep, Command, Config};

/// Config-driven experiments for the generalized derivative NLS.
///
/// The config is TOML with sections [grid] (n, length), [model] (sigma,
/// sign = -1 gDNLS / +1 DNLSb, b, regularization = { k, cutoff }), [step]
/// (dt, t_final, record_every, dealias), [experiment] (datum, seed,
/// experiment parameters, [experiment.tolerances]) and, for `sweep`,
/// [sweep] (command, parameters = { "dotted.key" = [values] },
/// max_concurrent). See README.md for every key and its default.
///
/// Exit status is 0 when every criterion passes and 1 otherwise.
#[derive(Debug, Parser)]
#[command(name = "gdnls-lab", version)]
struct Cli {
    /// Experiment to run.
    command: Command,
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output root; the run directory is `<out>/<command>`.
    #[arg(long, env = "GDNLS_LAB_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (1 runs everything sequentially).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gdnls-lab: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> gdnls_lab::LabResult<bool> {
    let mut cfg = Config::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if cli.jobs == Some(0) {
        return Err(gdnls_lab::LabError::Config("--jobs must be at least 1".into()));
    }
    let cap = cfg.sweep.as_ref().map(|s| s.max_concurrent);
    let jobs = match (cli.jobs, cli.command, cap) {
        (Some(j), _, _) => j,
        (None, Command::Sweep, Some(cap)) => available().min(cap),
        (None, _, _) => available(),
    };
    configure_pool(jobs);
    let exec = if jobs == 1 { Execution::Sequential } else { Execution::Parallel };
    let dir = cli.out.join(cli.command.name());
    if cli.command == Command::Sweep {
        let report = run_sweep(&dir, &cfg, jobs, exec)?;
        println!(
            "sweep: {}/{} points passed ({})",
            report.points - report.failed.len(),
            report.points,
            dir.display()
        );
        return Ok(report.passed);
    }
    let report = run_in(&dir, cli.command, &cfg, exec)?;
    print!("{}", gdnls_lab::run::summary_text(&report));
    println!("outputs: {}", dir.display());
    Ok(report.passed)
}

fn available() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[cfg(feature = "parallel")]
fn configure_pool(jobs: usize) {
    // only fails if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_jobs: usize) {}
