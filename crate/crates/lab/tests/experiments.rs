use gdnls::Execution;
use gdnls_lab::{expand, run_experiment, Command, Config, LabError};

fn config(body: &str) -> Config {
    Config::from_toml(body).unwrap_or_else(|e| panic!("{e}\n{body}"))
}

const SMALL: &str = "[grid]\nn = 128\nlength = 30.0\n[step]\ndt = 1e-2\nt_final = 0.2\n";

fn zero(extra: &str) -> Config {
    config(&format!("{SMALL}{extra}\n[experiment]\ndatum = {{ kind = \"zero\" }}\nsamples = 0\norder_levels = 2\nrecord_spacings = [4, 2]\n"))
}

#[test]
fn zero_field_is_a_trivial_pass() {
    for (command, extra) in [
        (Command::ConservationDrift, ""),
        (Command::RegularizationConvergence, ""),
        (Command::Picard, "[model]\nregularization = { k = 3 }"),
        (Command::ScalingSymmetry, ""),
        (Command::GaugeCheck, ""),
        (Command::LipschitzProbe, ""),
        (Command::EnvelopeReport, ""),
    ] {
        let out = run_experiment(command, &zero(extra), Execution::Sequential)
            .unwrap_or_else(|e| panic!("{command}: {e}"));
        assert!(out.passed(), "{command}: {:?}", out.criteria);
        assert!(!out.files.is_empty(), "{command}");
    }
}

#[test]
fn zero_block_gives_an_empty_modulation_split() {
    let cfg = config(
        "[grid]\nn = 256\nlength = 25.132741228718345\n[step]\ndt = 1e-2\n\
         [experiment]\ndatum = { kind = \"zero\" }\nj = 4\n",
    );
    let out = run_experiment(Command::ModulationReport, &cfg, Execution::Sequential).unwrap();
    assert!(out.passed());
    assert_eq!(out.notes["empty"], true);
}

#[test]
fn stationary_soliton_matches_its_profile() {
    let cfg = config(include_str!("../../../configs/soliton_stationary.toml"));
    let out = run_experiment(Command::SolitonPropagation, &cfg, Execution::Parallel).unwrap();
    assert!(out.passed(), "{:?}", out.criteria);
    assert_eq!(out.notes["qualitative_only"], false);
}

#[test]
fn soliton_parameter_gates() {
    // c beyond 2√ω has no travelling wave: rejected by the branch preconditions
    let outside = config(
        "[grid]\nn = 512\nlength = 80.0\n[model]\nsign = 1\n[experiment]\nomega = 0.25\nc = 1.5\n",
    );
    assert!(run_experiment(Command::SolitonPropagation, &outside, Execution::Sequential).is_err());
    let wrong_sign = config("[grid]\nn = 512\nlength = 80.0\n[experiment]\nomega = 1.0\nc = 1.0\n");
    let err = run_experiment(Command::SolitonPropagation, &wrong_sign, Execution::Sequential).unwrap_err();
    assert!(err.to_string().contains("model.sign"), "{err}");
}

#[test]
fn tight_tolerances_fail_honestly() {
    let mut cfg = config(include_str!("../../../configs/plane_wave.toml"));
    cfg.experiment.tolerances.exact_error = 1e-20;
    let out = run_experiment(Command::ConservationDrift, &cfg, Execution::Sequential).unwrap();
    assert!(!out.passed());
    assert!(!out.criterion("exact error").unwrap().passed);
    assert!(out.criterion("orbit drift").unwrap().passed);
}

#[test]
fn coarse_truncations_beyond_the_grid_coincide() {
    // every P_{<k} with 2^{k−1} above the Nyquist frequency is the identity
    let cfg = config(&format!("{SMALL}[experiment]\nk_values = [9, 10, 11]\n"));
    let out = run_experiment(Command::RegularizationConvergence, &cfg, Execution::Sequential).unwrap();
    assert!(out.passed(), "{:?}", out.criteria);
    let csv = &out.files.iter().find(|(n, _)| n == "distances.csv").unwrap().1;
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0")), "{csv}");
}

#[test]
fn energy_bound_calibrates_and_validates() {
    let cfg = config("[grid]\nn = 256\nlength = 40.0\n[model]\nsigma = 0.75\n[experiment]\nsamples = 40\nseed = 3\n");
    let out = run_experiment(Command::EnergyBound, &cfg, Execution::Parallel).unwrap();
    assert!(out.passed(), "{:?}", out.criteria);
    assert!(!out.warnings.is_empty());
    let bad = config("[grid]\nn = 256\nlength = 40.0\n[model]\nsigma = 1.0\n");
    assert!(run_experiment(Command::EnergyBound, &bad, Execution::Parallel).is_err());
}

#[test]
fn execution_strategy_does_not_change_outputs() {
    for (command, cfg) in [
        (Command::EnvelopeReport, config(&format!("{SMALL}[experiment]\nsamples = 12\nseed = 4\n"))),
        (Command::LipschitzProbe, config(SMALL)),
    ] {
        let seq = run_experiment(command, &cfg, Execution::Sequential).unwrap();
        let par = run_experiment(command, &cfg, Execution::Parallel).unwrap();
        assert_eq!(seq.files, par.files, "{command}");
    }
}

#[test]
fn sweeps_expand_in_declared_order() {
    let cfg = config(
        "[grid]\nn = 512\nlength = 80.0\n[model]\nsign = 1\n\
         [sweep]\ncommand = \"soliton-propagation\"\nparameters = { \"experiment.omega\" = [1.0, 2.0], \"experiment.c\" = [0.0, 1.0] }\n",
    );
    let (command, points) = expand(&cfg).unwrap();
    assert_eq!(command, Command::SolitonPropagation);
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.config.experiment.c, p.config.experiment.omega)).collect();
    // keys are sorted, so `experiment.c` is the outer axis
    assert_eq!(pairs, vec![(0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0)]);
    assert!(points.iter().all(|p| p.config.sweep.is_none()));
}

#[test]
fn sweep_errors() {
    let bad_key = config(&format!("{SMALL}[sweep]\ncommand = \"picard\"\nparameters = {{ \"model.sigmaa\" = [1.0] }}\n"));
    assert!(matches!(expand(&bad_key), Err(LabError::Config(_))));
    let nested = config(&format!("{SMALL}[sweep]\ncommand = \"sweep\"\nparameters = {{}}\n"));
    assert!(expand(&nested).is_err());
    let unknown = config(&format!("{SMALL}[sweep]\ncommand = \"nope\"\nparameters = {{}}\n"));
    assert!(expand(&unknown).is_err());
}
