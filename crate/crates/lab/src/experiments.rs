//! The named experiments. Each one is a pure function of its config: it
//! returns criteria, CSV files and diagnostics, and never touches the disk.

use std::fmt;
use std::str::FromStr;

use gdnls::analysis::{
    energy_bound_audit, energy_bound_exponent, frequency_envelope, modulation_split, sample_rng,
    write_modulation_csv, PacketEnsemble,
};
use gdnls::gauge::{antiderivative, full_gauge, gauge_residual, partial_gauge, AmplitudeCutoffs};
use gdnls::integrators::{evolve, evolve_regularized, free_evolution, picard_construct, StepConfig, Trajectory};
use gdnls::model::{self, rescale, Convention, ModelParams, TimeCutoff};
use gdnls::solitons::{dnlsb_residual, gamma_of, soliton_field, SolitonSpec};
use gdnls::{Complex64, Execution, FieldState, Grid, LpBand, LpLadder};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Config, Tolerances};
use crate::error::{LabError, LabResult};
use crate::table::{int, num, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Command {
    SolitonPropagation,
    ConservationDrift,
    RegularizationConvergence,
    Picard,
    ScalingSymmetry,
    GaugeCheck,
    LipschitzProbe,
    EnvelopeReport,
    ModulationReport,
    EnergyBound,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::SolitonPropagation,
        Command::ConservationDrift,
        Command::RegularizationConvergence,
        Command::Picard,
        Command::ScalingSymmetry,
        Command::GaugeCheck,
        Command::LipschitzProbe,
        Command::EnvelopeReport,
        Command::ModulationReport,
        Command::EnergyBound,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolitonPropagation => "soliton-propagation",
            Command::ConservationDrift => "conservation-drift",
            Command::RegularizationConvergence => "regularization-convergence",
            Command::Picard => "picard",
            Command::ScalingSymmetry => "scaling-symmetry",
            Command::GaugeCheck => "gauge-check",
            Command::LipschitzProbe => "lipschitz-probe",
            Command::EnvelopeReport => "envelope-report",
            Command::ModulationReport => "modulation-report",
            Command::EnergyBound => "energy-bound",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Criterion {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub criteria: Vec<Criterion>,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub notes: Map<String, Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.criteria.push(Criterion::new(name, passed, detail));
    }

    fn table(&mut self, t: Table) {
        self.files.push((format!("{}.csv", t.name), t.to_csv()));
    }

    fn ledger(&mut self, name: &str, traj: &Trajectory) -> LabResult<()> {
        let mut out = Vec::new();
        traj.write_ledger_csv(&mut out)?;
        self.files.push((name.to_string(), utf8(out)));
        Ok(())
    }

    fn absorb(&mut self, traj: &Trajectory) {
        for w in traj.warnings() {
            if !self.warnings.contains(w) {
                self.warnings.push(w.clone());
            }
        }
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.insert(key.to_string(), value.into());
    }
}

fn utf8(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).expect("CSV writers emit ASCII")
}

/// Runs one experiment. `Sweep` is handled by [`crate::sweep`].
pub fn run(command: Command, cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    cfg.validate()?;
    match command {
        Command::SolitonPropagation => soliton_propagation(cfg),
        Command::ConservationDrift => conservation_drift(cfg, exec),
        Command::RegularizationConvergence => regularization_convergence(cfg, exec),
        Command::Picard => picard(cfg),
        Command::ScalingSymmetry => scaling_symmetry(cfg, exec),
        Command::GaugeCheck => gauge_check(cfg, exec),
        Command::LipschitzProbe => lipschitz_probe(cfg, exec),
        Command::EnvelopeReport => envelope_report(cfg, exec),
        Command::ModulationReport => modulation_report(cfg, exec),
        Command::EnergyBound => energy_bound(cfg, exec),
        Command::Sweep => Err(LabError::Config("sweep is not a single experiment".into())),
    }
}

/// Safety factor on `t_final × residual` for the spatial error floor.
const SPATIAL_FLOOR_FACTOR: f64 = 10.0;

/// Only the first and last snapshots.
const ENDPOINTS: usize = 1 << 30;

fn ladder_steps(cfg: &Config) -> Vec<f64> {
    let base = cfg.experiment.order_dt.unwrap_or(cfg.step.dt);
    (0..cfg.experiment.order_levels).map(|i| base * 0.5f64.powi(i as i32)).collect()
}

/// Ratios `v_i / v_{i+1}` of a dt-halving ladder, formed only while the finer
/// value is above the roundoff floor.
fn halving_ratios(values: &[f64], floor: f64) -> Vec<f64> {
    values
        .windows(2)
        .take_while(|w| w[1] > floor)
        .map(|w| w[0] / w[1])
        .collect()
}

fn order_check(values: &[f64], floor: f64, tol: &Tolerances, at_least: bool) -> (bool, String) {
    let ratios = halving_ratios(values, floor);
    let (lo, hi) = tol.order_range();
    if ratios.is_empty() {
        return (true, format!("all levels at the roundoff floor {floor:e}"));
    }
    let ok = ratios.iter().all(|&r| r >= lo && (at_least || r <= hi));
    let bound = if at_least { format!("≥ {lo}") } else { format!("in [{lo}, {hi}]") };
    (ok, format!("halving ratios {} {bound}", fmt_list(&ratios)))
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn step_with(cfg: &Config, dt: f64, record_every: usize) -> StepConfig {
    StepConfig::new(dt).record_every(record_every).dealias(cfg.step.dealias)
}

fn datum(cfg: &Config, grid: &Grid) -> LabResult<FieldState> {
    Ok(cfg.experiment.datum.build(grid, cfg.experiment.seed)?)
}

fn relative(delta: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        delta / reference
    } else {
        delta
    }
}

fn soliton_propagation(cfg: &Config) -> LabResult<Outcome> {
    if cfg.model.sign != 1 {
        return Err(LabError::Config(
            "model.sign: soliton propagation runs under the DNLSb convention, set sign = 1".into(),
        ));
    }
    if cfg.model.regularization.is_some() {
        return Err(LabError::Config("model.regularization: solitons solve the unregularized law".into()));
    }
    let e = &cfg.experiment;
    let tol = cfg.tolerances();
    let spec = SolitonSpec::new(cfg.model.sigma, cfg.model.b, e.omega, e.c)?;
    let p = ModelParams {
        unsafe_sigma: cfg.model.unsafe_sigma,
        ..spec.model()
    };
    let grid = cfg.grid()?;
    let mut out = Outcome::default();
    out.note("branch", serde_json::to_value(spec.branch()).expect("enum"));
    out.note("gamma", spec.gamma());
    out.note("qualitative_only", spec.is_qualitative_only());
    if spec.is_qualitative_only() {
        out.warnings
            .push("algebraic soliton: polynomial tails are truncated by the torus; results are qualitative".into());
    }

    let u0 = soliton_field(&spec, 0.0, &grid)?;
    let traj = evolve(&u0, &p, cfg.step.t_final, &cfg.step_config())?;
    out.absorb(&traj);
    let mut errors = Table::new("error_vs_t", &["t", "l2_error", "relative_error"]);
    let mut final_error = 0.0;
    for u in traj.states() {
        let exact = soliton_field(&spec, u.time(), &grid)?;
        final_error = u.l2_distance(&exact)?;
        errors.push(vec![num(u.time()), num(final_error), num(relative(final_error, exact.l2_norm()))]);
    }
    out.table(errors);
    out.ledger("ledger.csv", &traj)?;
    out.check(
        "soliton error",
        final_error <= tol.solution_error,
        format!("L² error {final_error:.3e} at t = {} (≤ {:e})", cfg.step.t_final, tol.solution_error),
    );

    let exact = soliton_field(&spec, cfg.step.t_final, &grid)?;
    let mut ladder = Table::new("convergence", &["dt", "l2_error"]);
    let mut ladder_errors = Vec::new();
    for dt in ladder_steps(cfg) {
        let run = evolve(&u0, &p, cfg.step.t_final, &step_with(cfg, dt, ENDPOINTS))?;
        out.absorb(&run);
        let err = run.last().expect("non-empty").l2_distance(&exact)?;
        ladder.push(vec![num(dt), num(err)]);
        ladder_errors.push(err);
    }
    out.table(ladder);
    // the spatial error accumulates at most like t·R on this grid
    let spatial = SPATIAL_FLOOR_FACTOR * cfg.step.t_final * dnlsb_residual(&spec, &grid)?;
    let floor = tol.error_floor.max(spatial);
    out.note("error_floor", floor);
    let (ok, detail) = order_check(&ladder_errors, floor, tol, false);
    out.check("dt convergence", ok, format!("errors {}; {detail}", fmt_sci(&ladder_errors)));

    if !e.residual_n.is_empty() {
        let mut table = Table::new("residual", &["n", "residual_l2"]);
        let mut res = Vec::new();
        for &n in &e.residual_n {
            let r = dnlsb_residual(&spec, &Grid::new(n, cfg.grid.length)?)?;
            table.push(vec![int(n as u64), num(r)]);
            res.push(r);
        }
        out.table(table);
        let last = *res.last().expect("non-empty");
        out.check(
            "soliton residual",
            last <= tol.residual,
            format!("residual {last:.3e} at n = {} (≤ {:e})", e.residual_n.last().expect("non-empty"), tol.residual),
        );
        let decreasing = res.windows(2).all(|w| w[1] < w[0] || w[1] <= tol.error_floor);
        out.check(
            "residual decreases with n",
            decreasing,
            format!("residuals {} (floor {:e})", fmt_sci(&res), tol.error_floor),
        );
    }
    Ok(out)
}

/// Largest relative drift of `(M, E, P)` over the ledger.
fn max_drift(traj: &Trajectory) -> (f64, f64, f64) {
    let ledger = traj.ledger();
    let f = ledger[0];
    ledger.iter().fold((0.0f64, 0.0f64, 0.0f64), |(dm, de, dp), r| {
        (
            dm.max(relative((r.mass - f.mass).abs(), f.mass)),
            de.max((r.energy - f.energy).abs() / (1.0 + f.energy.abs())),
            dp.max((r.momentum - f.momentum).abs() / (1.0 + f.momentum.abs())),
        )
    })
}

fn conservation_drift(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let tol = cfg.tolerances();
    let u0 = datum(cfg, &grid)?;
    let t_final = cfg.step.t_final;
    let mut out = Outcome::default();

    let main = evolve(&u0, &p, t_final, &cfg.step_config())?;
    out.absorb(&main);
    out.ledger("ledger.csv", &main)?;
    let f = main.ledger()[0];
    let mut series = Table::new("drift", &["t", "mass", "energy", "momentum"]);
    for r in main.ledger() {
        series.push(vec![
            num(r.t),
            num(relative((r.mass - f.mass).abs(), f.mass)),
            num((r.energy - f.energy).abs() / (1.0 + f.energy.abs())),
            num((r.momentum - f.momentum).abs() / (1.0 + f.momentum.abs())),
        ]);
    }
    out.table(series);

    let exact_at = |t: f64| cfg.experiment.datum.exact(&grid, &p, t).transpose();
    let steps = ladder_steps(cfg);
    let runs = exec.map(&steps, |&dt| evolve(&u0, &p, t_final, &step_with(cfg, dt, 1)));
    let exact = exact_at(t_final)?;
    let mut order = Table::new("drift_order", &["dt", "mass", "energy", "momentum", "exact_error"]);
    let (mut dm, mut de, mut dp, mut ex) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (dt, run) in steps.iter().zip(runs) {
        let run = run?;
        out.absorb(&run);
        let (m, e, mo) = max_drift(&run);
        let err = match &exact {
            Some(x) => relative(run.last().expect("non-empty").l2_distance(x)?, x.l2_norm()),
            None => f64::NAN,
        };
        order.push(vec![num(*dt), num(m), num(e), num(mo), num(err)]);
        dm.push(m);
        de.push(e);
        dp.push(mo);
        ex.push(err);
    }
    out.table(order);

    match exact {
        Some(x) => {
            let (m, e, mo) = max_drift(&main);
            let orbit = m.max(e).max(mo);
            out.check(
                "orbit drift",
                orbit <= tol.orbit_drift,
                format!("max relative drift {orbit:.3e} at dt = {} (≤ {:e})", cfg.step.dt, tol.orbit_drift),
            );
            let err = relative(main.last().expect("non-empty").l2_distance(&x)?, x.l2_norm());
            out.check(
                "exact error",
                err <= tol.exact_error,
                format!("relative L² error {err:.3e} at dt = {} (≤ {:e})", cfg.step.dt, tol.exact_error),
            );
            let (ok, detail) = order_check(&ex, tol.error_floor, tol, false);
            out.check("exact error order", ok, format!("errors {}; {detail}", fmt_sci(&ex)));
        }
        None => {
            for (name, values, at_least) in [
                ("mass drift order", &dm, false),
                ("energy drift order", &de, false),
                ("momentum drift order", &dp, true),
            ] {
                let (ok, detail) = order_check(values, tol.drift_floor, tol, at_least);
                out.check(name, ok, format!("drifts {}; {detail}", fmt_sci(values)));
            }
        }
    }
    Ok(out)
}

fn regularization_convergence(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let base = cfg.params()?;
    let tol = cfg.tolerances();
    let ks = &cfg.experiment.k_values;
    if ks.len() < 2 {
        return Err(LabError::Config("experiment.k_values: need at least two truncations".into()));
    }
    let cutoff = base.regularization.map(|r| r.cutoff).unwrap_or_default();
    let u0 = datum(cfg, &grid)?;
    let step = cfg.step_config();
    let runs = exec.map(ks, |&k| {
        evolve_regularized(&u0, &base.with_regularization(k, cutoff), cfg.step.t_final, &step)
    });
    let runs = runs.into_iter().collect::<gdnls::Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    runs.iter().for_each(|r| out.absorb(r));
    out.note("ladder_j_max", LpLadder::new(&grid).j_max());

    let mut table = Table::new("distances", &["k_coarse", "k_fine", "distance"]);
    let mut d = Vec::new();
    for (i, pair) in runs.windows(2).enumerate() {
        let dist = pair[0].linf_l2_distance(&pair[1])?;
        table.push(vec![int(ks[i]), int(ks[i + 1]), num(dist)]);
        d.push(dist);
    }
    out.table(table);
    let monotone = d.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    out.check("monotone decrease", monotone, format!("L^∞_T L² distances {}", fmt_sci(&d)));
    let ratios: Vec<f64> = d.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    let geometric = ratios.iter().all(|&r| r <= tol.regularization_ratio)
        && d.windows(2).all(|w| w[0] > 0.0 || w[1] == 0.0);
    out.check(
        "geometric decay",
        geometric,
        format!("successive ratios {} (≤ {})", fmt_sci(&ratios), tol.regularization_ratio),
    );
    Ok(out)
}

fn picard(cfg: &Config) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    if p.regularization.is_none() {
        return Err(LabError::Config(
            "model.regularization: the Picard construction needs a truncation, e.g. { k = 5 }".into(),
        ));
    }
    let tol = cfg.tolerances();
    let u0 = datum(cfg, &grid)?;
    let step = cfg.step_config();
    let run = picard_construct(&u0, &p, cfg.step.t_final, cfg.experiment.n_iter, &step)?;
    let reg = evolve_regularized(&u0, &p, cfg.step.t_final, &step)?;
    let mut out = Outcome::default();
    out.absorb(&reg);
    let d = &run.differences;
    let mut table = Table::new("picard", &["n", "d_n", "ratio"]);
    for (i, &dn) in d.iter().enumerate() {
        let ratio = if i == 0 { String::new() } else { num(dn / d[i - 1]) };
        table.push(vec![int(i as u64), num(dn), ratio]);
    }
    out.table(table);
    let ok = d.windows(2).skip(1).all(|w| w[1] <= tol.picard_ratio * w[0]);
    out.check(
        "contraction",
        ok,
        format!("d_n {}; ratios for n ≥ 2 must be ≤ {}", fmt_sci(d), tol.picard_ratio),
    );
    let gap = run.final_iterate().linf_l2_distance(&reg)?;
    let last = d.last().copied().unwrap_or(0.0);
    out.check(
        "matches regularized flow",
        gap <= tol.picard_tail * last,
        format!("distance {gap:.3e} ≤ {} × d_last = {:.3e}", tol.picard_tail, tol.picard_tail * last),
    );
    Ok(out)
}

fn scaling_symmetry(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let tol = cfg.tolerances();
    let sigma = p.sigma;
    let u0 = datum(cfg, &grid)?;
    let (t, dt) = (cfg.step.t_final, cfg.step.dt);
    let rows = exec.map(&cfg.experiment.lambdas, |&lambda| -> LabResult<(f64, f64)> {
        let last = |traj: Trajectory| traj.last().cloned().expect("non-empty");
        let lhs = last(evolve(&rescale(&u0, lambda, sigma)?, &p, t, &step_with(cfg, dt / (lambda * lambda), ENDPOINTS))?);
        let long = lambda * lambda * t;
        let rhs = rescale(&last(evolve(&u0, &p, long, &step_with(cfg, dt, ENDPOINTS))?), lambda, sigma)?;
        let half = rescale(&last(evolve(&u0, &p, long, &step_with(cfg, 0.5 * dt, ENDPOINTS))?), lambda, sigma)?;
        Ok((lhs.l2_distance(&rhs)?, rhs.l2_distance(&half)?))
    });
    let mut out = Outcome::default();
    let mut table = Table::new("scaling", &["lambda", "difference", "solver_error"]);
    let mut ok = true;
    let mut details = Vec::new();
    for (&lambda, row) in cfg.experiment.lambdas.iter().zip(rows) {
        let (diff, err) = row?;
        table.push(vec![num(lambda), num(diff), num(err)]);
        ok &= diff <= tol.scaling_factor * err;
        details.push(format!("λ={lambda}: {diff:.3e} vs {:.3e}", tol.scaling_factor * err));
    }
    out.table(table);
    out.check("scaling commutation", ok, details.join("; "));
    Ok(out)
}

fn modulus_preserved(w: &FieldState, u: &FieldState, ulps: f64) -> bool {
    w.values()
        .iter()
        .zip(u.values())
        .all(|(a, b)| (a.norm() - b.norm()).abs() <= ulps * f64::EPSILON * b.norm())
}

fn gauge_check(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    if p.convention != Convention::Gdnls || p.b != 0.0 || p.regularization.is_some() {
        return Err(LabError::Config(
            "model: the gauge identity is checked for gDNLS (sign = -1, b = 0, no regularization)".into(),
        ));
    }
    let tol = cfg.tolerances();
    let u0 = datum(cfg, &grid)?;
    let mut spacings = cfg.experiment.record_spacings.clone();
    spacings.sort_unstable_by(|a, b| b.cmp(a));
    spacings.dedup();
    let steps = (cfg.step.t_final / cfg.step.dt).round() as usize;
    if let Some(&widest) = spacings.first() {
        if steps / widest < 4 {
            return Err(LabError::Config(format!(
                "experiment.record_spacings: spacing {widest} leaves fewer than 5 snapshots in {steps} steps"
            )));
        }
    }
    let runs = exec.map(&spacings, |&every| -> LabResult<(Trajectory, f64, Vec<f64>, Vec<f64>)> {
        let traj = evolve(&u0, &p, cfg.step.t_final, &step_with(cfg, cfg.step.dt, every))?;
        let r = gauge_residual(&traj)?;
        Ok((traj, r.max(), r.t, r.residual_l2))
    });
    let mut out = Outcome::default();
    let mut series = Table::new("gauge_residual", &["snapshot_dt", "t", "residual_l2"]);
    let mut summary = Table::new("residual_order", &["snapshot_dt", "max_residual"]);
    let (mut h, mut r) = (Vec::new(), Vec::new());
    let mut last = None;
    for (&every, run) in spacings.iter().zip(runs) {
        let (traj, max, ts, rs) = run?;
        out.absorb(&traj);
        let spacing = every as f64 * cfg.step.dt;
        for (t, v) in ts.iter().zip(&rs) {
            series.push(vec![num(spacing), num(*t), num(*v)]);
        }
        summary.push(vec![num(spacing), num(max)]);
        h.push(spacing);
        r.push(max);
        last = traj.last().cloned();
    }
    out.table(series);
    out.table(summary);
    let finest = *r.last().expect("at least one spacing");
    out.check(
        "gauge residual",
        finest <= tol.gauge_residual,
        format!("max residual {finest:.3e} at snapshot spacing {} (≤ {:e})", h.last().expect("non-empty"), tol.gauge_residual),
    );
    let orders: Vec<f64> = (0..r.len().saturating_sub(1))
        .take_while(|&i| r[i + 1] > tol.error_floor)
        .map(|i| (r[i] / r[i + 1]).log2() / (h[i] / h[i + 1]).log2())
        .collect();
    out.check(
        "residual order",
        orders.iter().all(|&o| o >= tol.gauge_order),
        if orders.is_empty() {
            format!("residuals {} at the roundoff floor", fmt_sci(&r))
        } else {
            format!("residuals {}; observed orders {} (≥ {})", fmt_sci(&r), fmt_list(&orders), tol.gauge_order)
        },
    );

    let ulps = tol.modulus_ulps;
    let mut modulus_ok = true;
    for u in [Some(&u0), last.as_ref()].into_iter().flatten() {
        let (w, _) = full_gauge(u, p.sigma)?;
        modulus_ok &= modulus_preserved(&w, u, ulps);
    }
    let ladder = LpLadder::new(&grid);
    let j = cfg.experiment.partial_j.unwrap_or(ladder.j_max().min(6));
    out.note("partial_gauge_order", "P_{<j-4} applied to chi_j(|u|^2)|u|^{2 sigma}, then antidifferentiated");
    if (5..=ladder.j_max()).contains(&j) {
        out.note("partial_gauge_j", j);
        let (ok, detail) = partial_gauge_limits(&u0, p.sigma, j, &ladder, ulps)?;
        out.check("partial gauge limits", ok, detail);
    } else if cfg.experiment.partial_j.is_some() {
        out.check(
            "partial gauge limits",
            false,
            format!("partial gauge needs 5 ≤ j ≤ j_max = {}, got {j}", ladder.j_max()),
        );
    } else {
        out.warnings.push(format!(
            "grid has j_max = {} < 5; partial gauge limits not checked",
            ladder.j_max()
        ));
    }
    out.check(
        "gauge modulus",
        modulus_ok,
        format!("|e^(iΦ)u| = |u| within {ulps} ulp at every grid point"),
    );
    Ok(out)
}

/// Gate all-off (`|u|² ≤ 2^{−j}` after scaling down) and all-on (after
/// shifting `u` away from zero) limits of the partial gauge.
fn partial_gauge_limits(
    u: &FieldState,
    sigma: f64,
    j: u32,
    ladder: &LpLadder,
    ulps: f64,
) -> LabResult<(bool, String)> {
    let peak = u.linf_norm();
    let scale = if peak > 0.0 { 0.5 * 2f64.powf(-0.5 * j as f64) / peak } else { 1.0 };
    let tiny = u.scale(Complex64::new(scale, 0.0))?;
    let (w, phase) = partial_gauge(&tiny, sigma, j, ladder)?;
    let off = phase.values().iter().all(|&v| v == 0.0)
        && w.values() == ladder.project(&tiny, LpBand::Block(j))?.values();

    let big = u.map(|_, z| z + Complex64::new(peak + 1.0, 0.0))?;
    let cut = AmplitudeCutoffs::new(j as i32);
    let gate_on = big.values().iter().all(|z| cut.chi_j(z.norm_sqr()) == 1.0);
    let (w, phase) = partial_gauge(&big, sigma, j, ladder)?;
    let power = big.map(|_, z| Complex64::new(z.norm_sqr().powf(sigma), 0.0))?;
    let expect = antiderivative(&ladder.project(&power, LpBand::Below(j - 4))?).values();
    let on = gate_on
        && phase
            .values()
            .iter()
            .zip(&expect)
            .all(|(a, b)| (a + 0.5 * b).abs() <= 1e-13 * (1.0 + b.abs()));
    let modulus = modulus_preserved(&w, &ladder.project(&big, LpBand::Block(j))?, ulps);
    let detail = format!(
        "j = {j}: gate all-off {}, gate all-on {}, modulus {}",
        verdict(off),
        verdict(on),
        verdict(modulus)
    );
    Ok((off && on && modulus, detail))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "exact"
    } else {
        "MISMATCH"
    }
}

/// Fixed unit-norm perturbation direction: an off-center complex bump.
fn perturbation(grid: &Grid) -> LabResult<FieldState> {
    let v = FieldState::from_fn(grid, 0.0, |x| {
        Complex64::new((-(x - 1.0).powi(2)).exp(), 0.5 * x * (-x * x).exp())
    })?;
    Ok(v.scale(Complex64::new(1.0 / v.l2_norm(), 0.0))?)
}

fn lipschitz_probe(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let tol = cfg.tolerances();
    let u0 = datum(cfg, &grid)?;
    let v = perturbation(&grid)?;
    let step = cfg.step_config();
    let reference = evolve(&u0, &p, cfg.step.t_final, &step)?;
    let rows = exec.map(&cfg.experiment.epsilons, |&eps| -> LabResult<(f64, f64)> {
        let u1 = u0.add(&v.scale(Complex64::new(eps, 0.0))?)?;
        let traj = evolve(&u1, &p, cfg.step.t_final, &step)?;
        Ok((reference.linf_l2_distance(&traj)?, u1.l2_distance(&u0)?))
    });
    let mut out = Outcome::default();
    out.absorb(&reference);
    let mut table = Table::new("lipschitz", &["epsilon", "distance", "ratio"]);
    let mut ratios = Vec::new();
    for (&eps, row) in cfg.experiment.epsilons.iter().zip(rows) {
        let (dist, initial) = row?;
        let ratio = dist / initial;
        table.push(vec![num(eps), num(dist), num(ratio)]);
        ratios.push(ratio);
    }
    out.table(table);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    out.check(
        "Lipschitz ratio",
        hi <= tol.lipschitz_spread * lo,
        format!("ratios {} spread {:.4} (≤ {})", fmt_list(&ratios), hi / lo, tol.lipschitz_spread),
    );
    Ok(out)
}

fn envelope_report(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let e = &cfg.experiment;
    let ladder = LpLadder::new(&grid);
    let mut items: Vec<(String, FieldState)> = Vec::new();
    if !e.datum.is_zero() {
        items.push(("datum".into(), datum(cfg, &grid)?));
    }
    for i in 0..e.samples {
        let field = e.fields[i % e.fields.len()];
        items.push((i.to_string(), field.sample(&grid, &mut sample_rng(e.seed, i))?));
    }
    // the ensemble already fans out; blocks within one field stay sequential
    let envelopes = exec.map(&items, |(_, u)| {
        frequency_envelope(u, &ladder, e.envelope_norm, e.delta, Execution::Sequential)
    });
    let mut out = Outcome::default();
    let mut values = Table::new("envelopes", &["sample", "j", "a_j", "block_norm"]);
    let mut checks = Table::new(
        "envelope_checks",
        &["sample", "bounding", "slowly_varying", "square_sum", "c_env", "admissible"],
    );
    let (mut failures, mut worst) = (0usize, 0.0f64);
    let mut c_env = 0.0;
    for ((name, _), env) in items.iter().zip(envelopes) {
        let env = env?;
        for (j, (a, b)) in env.values.iter().zip(&env.block_norms).enumerate() {
            values.push(vec![name.clone(), int(j as u64), num(*a), num(*b)]);
        }
        let c = env.check();
        checks.push(vec![
            name.clone(),
            c.bounding.to_string(),
            c.slowly_varying.to_string(),
            num(c.square_sum),
            num(env.c_env),
            c.passed().to_string(),
        ]);
        failures += usize::from(!c.passed());
        worst = worst.max(c.square_sum);
        c_env = env.c_env;
    }
    out.table(values);
    out.table(checks);
    out.check(
        "envelope admissibility",
        failures == 0,
        if items.is_empty() {
            "no fields".to_string()
        } else {
            format!(
                "{}/{} envelopes admissible; max square sum {worst:.4} (C_env {c_env:.4})",
                items.len() - failures,
                items.len()
            )
        },
    );
    Ok(out)
}

fn modulation_report(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let e = &cfg.experiment;
    let tol = cfg.tolerances();
    let ladder = LpLadder::new(&grid);
    let u0 = ladder.project(&datum(cfg, &grid)?, LpBand::Block(e.j))?;
    let eta = p.regularization.map(|r| r.cutoff).unwrap_or_else(TimeCutoff::default);
    let dt = cfg.step.dt;
    let steps = (2.0 * e.window / dt).round() as usize;
    let snaps = exec.map_range(0..steps + 1, |m| -> gdnls::Result<FieldState> {
        let t = -e.window + m as f64 * dt;
        free_evolution(&u0, t)?.scale(Complex64::new(eta.eval(t), 0.0))
    });
    let snaps = snaps.into_iter().collect::<gdnls::Result<Vec<_>>>()?;
    let traj = Trajectory::from_states(p, snaps)?;
    let split = modulation_split(&traj, &ladder, e.j, e.width)?;
    let mut out = Outcome::default();
    let mut csv = Vec::new();
    write_modulation_csv(&[split], &mut csv)?;
    out.files.push(("modulation.csv".into(), utf8(csv)));
    out.note("empty", split.empty);
    if split.empty {
        out.check("low modulation", true, "zero block: split is empty");
        out.check("fractions sum to one", true, "zero block: split is empty");
    } else {
        out.check(
            "low modulation",
            split.low >= tol.modulation_low,
            format!("low fraction {:.14} within width {} (≥ {})", split.low, e.width, tol.modulation_low),
        );
        let sum = split.low + split.high;
        out.check(
            "fractions sum to one",
            (sum - 1.0).abs() <= tol.fraction_sum,
            format!("low + high − 1 = {:.3e}", sum - 1.0),
        );
    }
    Ok(out)
}

fn energy_bound(cfg: &Config, exec: Execution) -> LabResult<Outcome> {
    let grid = cfg.grid()?;
    let e = &cfg.experiment;
    let tol = cfg.tolerances();
    let sigma = cfg.model.sigma;
    let displayed = energy_bound_exponent(sigma);
    let exponent = e.exponent.unwrap_or(displayed);
    let ensemble = PacketEnsemble::default();
    let calib = energy_bound_audit(&grid, sigma, exponent, &ensemble, e.samples, e.seed, exec)?;
    let held = energy_bound_audit(&grid, sigma, exponent, &ensemble, e.samples, e.seed.wrapping_add(1), exec)?;
    let mut out = Outcome::default();
    let mut table = Table::new("energy_bound", &["ensemble", "sample", "ratio"]);
    for (name, report) in [("calibration", &calib), ("held-out", &held)] {
        for (i, r) in report.ratios.iter().enumerate() {
            table.push(vec![name.to_string(), int(i as u64), num(*r)]);
        }
    }
    out.table(table);
    out.note("exponent", exponent);
    out.note("calibrated_constant", calib.constant);
    out.note("held_out_constant", held.constant);
    out.note("scale_consistent_exponent", 2.0 * displayed);
    if exponent != 2.0 * displayed {
        out.warnings.push(format!(
            "exponent {exponent} on M is not scale-invariant; the calibrated constant is ensemble-relative"
        ));
    }
    let bound = calib.constant + (tol.energy_margin - 1.0) * calib.constant.abs();
    out.check(
        "held-out energy bound",
        held.constant <= bound,
        format!(
            "held-out max {:.4e} vs calibrated C {:.4e} (margin {})",
            held.constant, calib.constant, tol.energy_margin
        ),
    );
    Ok(out)
}

/// `s_c(1) = 0` and `γ(1, −3/16) = 0` hold exactly in double precision.
pub fn formula_anchors() -> Vec<Criterion> {
    let sc = model::critical_index(1.0);
    let gamma = gamma_of(1.0, -3.0 / 16.0);
    vec![
        Criterion::new("critical index", sc == 0.0, format!("critical_index(1) = {sc:e}")),
        Criterion::new("gamma", gamma == 0.0, format!("gamma_of(1, -3/16) = {gamma:e}")),
    ]
}

/// Machine-readable summary of a config for the manifest.
pub fn resolved(cfg: &Config) -> Value {
    json!(cfg)
}
