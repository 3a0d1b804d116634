//! Run directories: `manifest.json` is written before the experiment starts
//! and finalized afterwards, next to the CSV outputs and `summary.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use gdnls::integrators::BLOW_UP_FACTOR;
use gdnls::Execution;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Config;
use crate::error::{LabError, LabResult};
use crate::experiments::{self, Command, Criterion, Outcome};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub experiment: String,
    pub status: Status,
    pub code_version: String,
    pub config: Value,
    pub execution: String,
    pub blow_up_factor: f64,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub wall_clock_seconds: Option<f64>,
    pub passed: Option<bool>,
    pub criteria: Vec<Criterion>,
    pub warnings: Vec<String>,
    pub notes: Map<String, Value>,
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Passed,
    Failed,
    Error,
}

impl Manifest {
    pub fn start(experiment: &str, config: Value, exec: Execution) -> Self {
        Manifest {
            schema: SCHEMA,
            experiment: experiment.to_string(),
            status: Status::Running,
            code_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            config,
            execution: if exec.is_parallel() { "parallel" } else { "sequential" }.to_string(),
            blow_up_factor: BLOW_UP_FACTOR,
            started_unix: unix_now(),
            finished_unix: None,
            wall_clock_seconds: None,
            passed: None,
            criteria: Vec::new(),
            warnings: Vec::new(),
            notes: Map::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    pub fn write(&self, dir: &Path) -> LabResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(&dir.join("manifest.json"), &(text + "\n"))
    }

    fn finish(&mut self, elapsed: f64, passed: bool) {
        self.finished_unix = Some(unix_now());
        self.wall_clock_seconds = Some(elapsed);
        self.passed = Some(passed);
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> LabResult<()> {
    fs::write(path, contents).map_err(|e| LabError::Io(path.display().to_string(), e))
}

pub(crate) fn create_dir(path: &Path) -> LabResult<()> {
    fs::create_dir_all(path).map_err(|e| LabError::Io(path.display().to_string(), e))
}

/// What a finished run left behind.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub passed: bool,
    pub criteria: Vec<Criterion>,
    pub error: Option<String>,
}

/// Runs `command` into `dir`. Experiment failures (bad parameters, tripped
/// guards) are recorded in the manifest and reported as a failed run; only
/// I/O problems are returned as errors.
pub fn run_in(dir: &Path, command: Command, cfg: &Config, exec: Execution) -> LabResult<RunReport> {
    create_dir(dir)?;
    let mut manifest = Manifest::start(command.name(), experiments::resolved(cfg), exec);
    manifest.write(dir)?;
    let clock = Instant::now();
    let result = experiments::run(command, cfg, exec);
    let elapsed = clock.elapsed().as_secs_f64();
    let report = match result {
        Ok(outcome) => finalize(dir, &mut manifest, outcome, elapsed)?,
        Err(e) => {
            manifest.status = Status::Error;
            manifest.error = Some(e.to_string());
            manifest.finish(elapsed, false);
            RunReport {
                dir: dir.to_path_buf(),
                passed: false,
                criteria: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };
    manifest.write(dir)?;
    write_file(&dir.join("summary.txt"), &summary_text(&report))?;
    Ok(report)
}

fn finalize(dir: &Path, manifest: &mut Manifest, outcome: Outcome, elapsed: f64) -> LabResult<RunReport> {
    for (name, contents) in &outcome.files {
        write_file(&dir.join(name), contents)?;
        manifest.outputs.push(name.clone());
    }
    let passed = outcome.passed();
    manifest.status = if passed { Status::Passed } else { Status::Failed };
    manifest.criteria = outcome.criteria.clone();
    manifest.warnings = outcome.warnings;
    manifest.notes = outcome.notes;
    manifest.finish(elapsed, passed);
    Ok(RunReport {
        dir: dir.to_path_buf(),
        passed,
        criteria: outcome.criteria,
        error: None,
    })
}

pub fn summary_text(report: &RunReport) -> String {
    let mut text = String::new();
    for c in &report.criteria {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
    }
    if let Some(e) = &report.error {
        text.push_str(&format!("ERROR {e}\n"));
    }
    text.push_str(if report.passed { "overall: PASS\n" } else { "overall: FAIL\n" });
    text
}
