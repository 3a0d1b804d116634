//! Cartesian-product parameter sweeps.
//!
//! Every point gets its own run directory under `points/`, owned by whichever
//! worker runs it. Finished rows go through a channel to a single writer,
//! which appends them to `summary.csv` in point order (buffering any that
//! arrive early), so the summary is identical for any number of workers.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use gdnls::Execution;

use crate::config::{Config, SweepConfig};
use crate::error::{LabError, LabResult};
use crate::experiments::{self, Command, Criterion};
use crate::run::{create_dir, run_in, summary_text, write_file, Manifest, RunReport, Status};
use crate::table::num;

/// One sweep point: the parameter values and the config they produce.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<(String, toml::Value)>,
    pub config: Config,
}

/// Expands the sweep into points; the last parameter varies fastest.
pub fn expand(cfg: &Config) -> LabResult<(Command, Vec<SweepPoint>)> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| LabError::Config("sweep: missing [sweep] section".into()))?;
    let command: Command = sweep.command.parse()?;
    if command == Command::Sweep {
        return Err(LabError::Config("sweep.command: sweeps cannot nest".into()));
    }
    let mut base = cfg.clone();
    base.sweep = None;
    let base = toml::Value::try_from(&base).map_err(|e| LabError::Config(e.to_string()))?;

    let axes: Vec<(&String, &Vec<toml::Value>)> = sweep.parameters.iter().collect();
    if let Some((key, _)) = axes.iter().find(|(_, v)| v.is_empty()) {
        return Err(LabError::Config(format!("sweep.parameters.{key}: empty list")));
    }
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut values = vec![(String::new(), toml::Value::Boolean(false)); axes.len()];
        for (slot, (key, list)) in axes.iter().enumerate().rev() {
            values[slot] = ((*key).clone(), list[rest % list.len()].clone());
            rest /= list.len();
        }
        let mut doc = base.clone();
        for (key, value) in &values {
            set_path(&mut doc, key, value.clone())?;
        }
        let config: Config = doc
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Config(format!("sweep point {index}: {e}")))?;
        config
            .validate()
            .map_err(|e| LabError::Config(format!("sweep point {index}: {e}")))?;
        points.push(SweepPoint { index, values, config });
    }
    Ok((command, points))
}

fn set_path(doc: &mut toml::Value, key: &str, value: toml::Value) -> LabResult<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| LabError::Config(format!("sweep.parameters.{key}: {part} is not inside a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    Err(LabError::Config("sweep.parameters: empty key".into()))
}

fn cell(v: &toml::Value) -> String {
    let text = match v {
        toml::Value::Float(x) => num(*x),
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub passed: bool,
    pub points: usize,
    pub failed: Vec<usize>,
}

/// Runs every point with at most `jobs` concurrent runs (the caller sizes the
/// worker pool accordingly).
pub fn run_sweep(dir: &Path, cfg: &Config, jobs: usize, exec: Execution) -> LabResult<SweepReport> {
    let sweep: &SweepConfig = cfg.sweep.as_ref().ok_or_else(|| LabError::Config("sweep: missing [sweep] section".into()))?;
    if jobs > sweep.max_concurrent {
        return Err(LabError::Sweep(format!(
            "resource cap exceeded: {jobs} concurrent runs requested, sweep.max_concurrent = {}",
            sweep.max_concurrent
        )));
    }
    let (command, points) = expand(cfg)?;
    create_dir(dir)?;
    let mut manifest = Manifest::start(Command::Sweep.name(), experiments::resolved(cfg), exec);
    manifest.notes.insert("points".into(), points.len().into());
    manifest.notes.insert("command".into(), command.name().into());
    manifest.write(dir)?;
    let clock = Instant::now();

    let header: Vec<String> = sweep.parameters.keys().cloned().collect();
    let path = dir.join("summary.csv");
    let file = File::create(&path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
    let (tx, rx) = mpsc::channel::<(usize, String, bool)>();
    let writer = std::thread::spawn(move || -> std::io::Result<Vec<bool>> {
        let mut out = BufWriter::new(file);
        writeln!(out, "point,{},passed,failed_criteria", header.join(","))?;
        let mut pending = BTreeMap::new();
        let mut next = 0;
        let mut verdicts = Vec::new();
        for (index, row, passed) in rx {
            pending.insert(index, (row, passed));
            while let Some((row, passed)) = pending.remove(&next) {
                writeln!(out, "{row}")?;
                verdicts.push(passed);
                next += 1;
            }
        }
        out.flush()?;
        Ok(verdicts)
    });

    let points_dir = dir.join("points");
    let results = exec.map(&points, |point| -> LabResult<()> {
        let run_dir = points_dir.join(format!("{:04}", point.index));
        let report = run_in(&run_dir, command, &point.config, exec)?;
        let row = summary_row(point, &report);
        tx.send((point.index, row, report.passed)).expect("summary writer alive");
        Ok(())
    });
    drop(tx);
    let verdicts = writer
        .join()
        .expect("summary writer panicked")
        .map_err(|e| LabError::Io(path.display().to_string(), e))?;
    results.into_iter().collect::<LabResult<Vec<()>>>()?;

    let failed: Vec<usize> = verdicts.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).collect();
    let passed = failed.is_empty();
    manifest.criteria = verdicts
        .iter()
        .enumerate()
        .map(|(i, &ok)| Criterion {
            name: format!("point {i:04}"),
            passed: ok,
            detail: format!("points/{i:04}"),
        })
        .collect();
    manifest.outputs.push("summary.csv".into());
    manifest.status = if passed { Status::Passed } else { Status::Failed };
    manifest.passed = Some(passed);
    manifest.wall_clock_seconds = Some(clock.elapsed().as_secs_f64());
    manifest.finished_unix = Some(manifest.started_unix + clock.elapsed().as_secs_f64());
    manifest.write(dir)?;
    let report = RunReport {
        dir: dir.to_path_buf(),
        passed,
        criteria: manifest.criteria.clone(),
        error: None,
    };
    write_file(&dir.join("summary.txt"), &summary_text(&report))?;
    Ok(SweepReport {
        passed,
        points: verdicts.len(),
        failed,
    })
}

fn summary_row(point: &SweepPoint, report: &RunReport) -> String {
    let mut cells = vec![point.index.to_string()];
    cells.extend(point.values.iter().map(|(_, v)| cell(v)));
    cells.push(report.passed.to_string());
    let failed: Vec<String> = match &report.error {
        Some(e) => vec![format!("error: {e}")],
        None => report.criteria.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
    };
    cells.push(cell(&toml::Value::String(failed.join("; "))));
    cells.join(",")
}
