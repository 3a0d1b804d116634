use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GAUGE: &str = r#"
[grid]
n = 256
length = 40.0

[step]
dt = 1e-3
t_final = 0.2

[experiment]
datum = { kind = "gaussian", amplitude = 0.8 }
record_spacings = [40, 20]
"#;

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdnls-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("GDNLS_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn manifest(run_dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(run_dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn passing_run_writes_a_complete_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gauge.toml", GAUGE);
    let out = lab(&["gauge-check", "--config", &cfg, "--out", "runs"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = tmp.path().join("runs/gauge-check");
    let m = manifest(&run);
    assert_eq!(m["schema"], 1);
    assert_eq!(m["status"], "passed");
    assert_eq!(m["config"]["grid"]["n"], 256);
    assert_eq!(m["config"]["experiment"]["tolerances"]["gauge_residual"], 1e-4);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    assert!(m["notes"]["partial_gauge_order"].is_string());
    for name in m["outputs"].as_array().unwrap() {
        assert!(run.join(name.as_str().unwrap()).exists());
    }
    assert!(fs::read_to_string(run.join("summary.txt")).unwrap().ends_with("overall: PASS\n"));

    // 17 significant digits in every float cell
    let csv = fs::read_to_string(run.join("residual_order.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("snapshot_dt,max_residual"));
    for cell in csv.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }
}

#[test]
fn failing_criterion_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{GAUGE}\n[experiment.tolerances]\ngauge_residual = 1e-30\n");
    let cfg = write_config(tmp.path(), "tight.toml", &body);
    let out = lab(&["gauge-check", "--config", &cfg, "--out", "runs"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(&tmp.path().join("runs/gauge-check"));
    assert_eq!(m["status"], "failed");
    assert_eq!(m["passed"], false);
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[grid]\nn = 64\nlength = 10.0\n[step]\nrecord_every = 0\n");
    let out = lab(&["picard", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step.record_every"));
}

#[test]
fn experiment_errors_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    // Picard without a truncation
    let cfg = write_config(tmp.path(), "p.toml", GAUGE);
    let out = lab(&["picard", "--config", &cfg, "--out", "runs"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(&tmp.path().join("runs/picard"));
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("model.regularization"));
}

#[test]
fn output_root_defaults_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gauge.toml", GAUGE);
    let root = tmp.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_gdnls-lab"))
        .args(["gauge-check", "--config", &cfg, "--jobs", "2"])
        .current_dir(tmp.path())
        .env("GDNLS_LAB_OUT", &root)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(root.join("gauge-check/manifest.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "[grid]\nn = 128\nlength = 30.0\n[experiment]\nsamples = 9\n";
    let cfg = write_config(tmp.path(), "env.toml", body);
    for (dir, jobs) in [("a", "1"), ("b", "3")] {
        let out = lab(&["envelope-report", "--config", &cfg, "--out", dir, "--jobs", jobs, "--seed", "17"], tmp.path());
        assert!(out.status.success());
    }
    for name in ["envelopes.csv", "envelope_checks.csv"] {
        let a = fs::read(tmp.path().join("a/envelope-report").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b/envelope-report").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let m = manifest(&tmp.path().join("a/envelope-report"));
    assert_eq!(m["config"]["experiment"]["seed"], 17);
}

const SWEEP: &str = r#"
[grid]
n = 2048
length = 80.0

[model]
sign = 1

[step]
dt = 2e-3
t_final = 0.2
record_every = 50

[experiment]
order_dt = 4e-3
order_levels = 2

[sweep]
command = "soliton-propagation"
max_concurrent = 2
"#;

#[test]
fn sweep_of_one_point_equals_a_single_run() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = write_config(
        tmp.path(),
        "sweep.toml",
        &format!("{SWEEP}parameters = {{ \"experiment.c\" = [0.5] }}\n"),
    );
    let single = write_config(
        tmp.path(),
        "single.toml",
        &SWEEP.split("[sweep]").next().unwrap().replace("order_levels = 2", "order_levels = 2\nc = 0.5"),
    );
    assert!(lab(&["sweep", "--config", &sweep, "--out", "s"], tmp.path()).status.success());
    assert!(lab(&["soliton-propagation", "--config", &single, "--out", "r"], tmp.path()).status.success());
    for name in ["error_vs_t.csv", "convergence.csv", "ledger.csv"] {
        let a = fs::read(tmp.path().join("s/sweep/points/0000").join(name)).unwrap();
        let b = fs::read(tmp.path().join("r/soliton-propagation").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn two_by_two_sweep_emits_four_rows_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{SWEEP}parameters = {{ \"experiment.omega\" = [1.0, 2.0], \"experiment.c\" = [0.0, 1.0] }}\n");
    let cfg = write_config(tmp.path(), "sweep.toml", &body);
    let out = lab(&["sweep", "--config", &cfg, "--out", "s", "--jobs", "2"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(tmp.path().join("s/sweep/summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "point,experiment.c,experiment.omega,passed,failed_criteria");
    assert_eq!(rows.len(), 5);
    for (i, row) in rows[1..].iter().enumerate() {
        assert!(row.starts_with(&format!("{i},")), "{row}");
        assert!(row.ends_with(",true,"), "{row}");
    }
    let m = manifest(&tmp.path().join("s/sweep"));
    assert_eq!(m["schema"], 1);
    assert_eq!(m["notes"]["points"], 4);

    let capped = lab(&["sweep", "--config", &cfg, "--out", "s2", "--jobs", "3"], tmp.path());
    assert_eq!(capped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("resource cap exceeded"));
}
