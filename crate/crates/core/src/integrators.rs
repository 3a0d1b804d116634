//! Integrating-factor (Lawson) RK4 time stepping and the Picard construction.
//!
//! In Fourier variables the law `u_t = i u_xx + N(u, t)` reads
//! `û_t = −iξ² û + N̂`. The stiff linear part is applied exactly through
//! `E(h) = e^{−iξ² h}` and classical RK4 handles the rest:
//!
//! ```text
//!     k1 = N(û)
//!     k2 = N(E(h/2)(û + h/2 k1))
//!     k3 = N(E(h/2)û + h/2 k2)
//!     k4 = N(E(h)û + h E(h/2) k3)
//!     û ← E(h)û + h/6 (E(h)k1 + 2E(h/2)(k2 + k3) + k4)
//! ```

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::sobolev_norm;
use crate::error::{Error, Result};
use crate::model::{self, ModelParams, NonlinearityKernel};
use crate::spectral::{ensure_finite, l2_distance, lp, DerivativeKind, FieldState, Grid};

/// Abort once `sup|u|` exceeds this multiple of its initial value.
pub const BLOW_UP_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_dealias() -> bool {
    true
}

fn default_record_every() -> usize {
    1
}

impl StepConfig {
    pub fn new(dt: f64) -> Self {
        StepConfig {
            dt,
            dealias: true,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt = {} must be positive", self.dt)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub h1: f64,
    pub linf: f64,
}

impl LedgerRow {
    pub fn of(u: &FieldState, p: &ModelParams) -> Self {
        LedgerRow {
            t: u.time(),
            mass: model::mass(u),
            momentum: model::momentum(u),
            energy: model::energy(u, p),
            h1: sobolev_norm(u, 1.0, DerivativeKind::Inhomogeneous),
            linf: u.linf_norm(),
        }
    }
}

/// Time-ordered snapshots with a conserved-quantity ledger.
#[derive(Clone, Debug)]
pub struct Trajectory {
    states: Vec<FieldState>,
    ledger: Vec<LedgerRow>,
    params: ModelParams,
    warnings: Vec<String>,
}

impl Trajectory {
    pub fn new(params: ModelParams) -> Self {
        Trajectory {
            states: Vec::new(),
            ledger: Vec::new(),
            params,
            warnings: Vec::new(),
        }
    }

    /// Append a snapshot; times must increase strictly.
    pub fn push(&mut self, state: FieldState) -> Result<()> {
        if let Some(last) = self.states.last() {
            if state.time() <= last.time() {
                return Err(Error::InvalidParams(format!(
                    "snapshot time {} does not follow {}",
                    state.time(),
                    last.time()
                )));
            }
            state.check_same_grid(last)?;
        }
        self.ledger.push(LedgerRow::of(&state, &self.params));
        self.states.push(state);
        Ok(())
    }

    pub fn from_states(params: ModelParams, states: Vec<FieldState>) -> Result<Self> {
        let mut traj = Trajectory::new(params);
        for s in states {
            traj.push(s)?;
        }
        Ok(traj)
    }

    pub fn states(&self) -> &[FieldState] {
        &self.states
    }

    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(FieldState::time).collect()
    }

    pub fn first(&self) -> Option<&FieldState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&FieldState> {
        self.states.last()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.states.first().map(FieldState::grid)
    }

    /// Snapshot spacing if uniform to 1e-9 relative.
    pub fn uniform_spacing(&self) -> Result<f64> {
        if self.states.len() < 2 {
            return Err(Error::InsufficientSnapshots {
                needed: 2,
                got: self.states.len(),
            });
        }
        let t = self.times();
        let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        let uniform = t
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300) + 1e-13);
        if uniform {
            Ok(h)
        } else {
            Err(Error::NonUniformSnapshots)
        }
    }

    /// `sup_t ‖u(t) − v(t)‖_{L²}` over snapshots recorded at the same times.
    pub fn linf_l2_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::InvalidParams(format!(
                "trajectories have {} and {} snapshots",
                self.len(),
                other.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.states.iter().zip(&other.states) {
            if (a.time() - b.time()).abs() > 1e-9 * a.time().abs().max(1.0) {
                return Err(Error::InvalidParams("snapshot times differ".into()));
            }
            worst = worst.max(a.l2_distance(b)?);
        }
        Ok(worst)
    }

    /// `sup_t ‖u(t)‖_{L²}`.
    pub fn linf_l2_norm(&self) -> f64 {
        self.states.iter().map(FieldState::l2_norm).fold(0.0, f64::max)
    }

    pub fn write_ledger_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,mass,momentum,energy,h1,linf")?;
        for r in &self.ledger {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.mass, r.momentum, r.energy, r.h1, r.linf
            )?;
        }
        Ok(())
    }
}

struct Schedule {
    t0: f64,
    steps: usize,
    h: f64,
}

impl Schedule {
    fn new(t0: f64, t_final: f64, dt: f64) -> Result<Self> {
        if !t_final.is_finite() || t_final < t0 {
            return Err(Error::InvalidParams(format!(
                "t_final = {t_final} precedes the initial time {t0}"
            )));
        }
        let span = t_final - t0;
        let steps = if span == 0.0 {
            0
        } else {
            ((span / dt) - 1e-9).ceil().max(1.0) as usize
        };
        let h = if steps == 0 { 0.0 } else { span / steps as f64 };
        Ok(Schedule { t0, steps, h })
    }

    fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.h
    }
}

fn linear_factor(grid: &Grid, tau: f64) -> Vec<Complex64> {
    grid.frequencies()
        .iter()
        .map(|&xi| Complex64::from_polar(1.0, -xi * xi * tau))
        .collect()
}

/// Drive Lawson RK4. `rhs(û, t, half_step, out)` writes `N̂` and returns
/// `sup|u|`; `half_step` is `2m`, `2m+1`, `2m+2` for the stage times
/// `t_m`, `t_m + h/2`, `t_{m+1}`. `visit(m, û)` runs after every step.
fn lawson_rk4(
    grid: &Grid,
    u_hat: &mut [Complex64],
    sched: &Schedule,
    linf0: f64,
    mut rhs: impl FnMut(&[Complex64], f64, usize, &mut [Complex64]) -> f64,
    mut visit: impl FnMut(usize, &[Complex64]) -> Result<()>,
) -> Result<()> {
    let n = grid.n();
    let h = sched.h;
    let e_half = linear_factor(grid, 0.5 * h);
    let e_full = linear_factor(grid, h);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let limit = BLOW_UP_FACTOR * linf0;

    for m in 0..sched.steps {
        let t = sched.time(m);
        let linf = rhs(u_hat, t, 2 * m, &mut k1);
        if linf0 > 0.0 && !(linf <= limit) {
            return Err(Error::BlowUp { time: t, linf, limit });
        }
        for i in 0..n {
            stage[i] = e_half[i] * (u_hat[i] + 0.5 * h * k1[i]);
        }
        rhs(&stage, t + 0.5 * h, 2 * m + 1, &mut k2);
        for i in 0..n {
            stage[i] = e_half[i] * u_hat[i] + 0.5 * h * k2[i];
        }
        rhs(&stage, t + 0.5 * h, 2 * m + 1, &mut k3);
        for i in 0..n {
            stage[i] = e_full[i] * u_hat[i] + h * e_half[i] * k3[i];
        }
        rhs(&stage, t + h, 2 * m + 2, &mut k4);
        for i in 0..n {
            u_hat[i] = e_full[i] * u_hat[i]
                + h / 6.0 * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]);
        }
        ensure_finite(u_hat, "solution spectrum")?;
        visit(m + 1, u_hat)?;
    }
    Ok(())
}

fn cfl_warning(u0: &FieldState, p: &ModelParams, dt: f64) -> Option<String> {
    let speed = u0.linf_norm().powf(2.0 * p.sigma);
    let bound = u0.grid().dx() / speed;
    (speed > 0.0 && dt > bound).then(|| {
        format!("dt = {dt:e} exceeds the transport CFL estimate dx / sup|u|^(2σ) = {bound:e}")
    })
}

/// Integrate the law described by `p` from `u0.time()` to `t_final`.
pub fn evolve(u0: &FieldState, p: &ModelParams, t_final: f64, cfg: &StepConfig) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    ensure_finite(u0.values(), "initial data")?;
    let grid = u0.grid().clone();
    let sched = Schedule::new(u0.time(), t_final, cfg.dt)?;

    let mut traj = Trajectory::new(*p);
    traj.warnings.extend(cfl_warning(u0, p, cfg.dt));
    traj.push(u0.clone())?;

    let mut kernel = NonlinearityKernel::new(&grid, *p, cfg.dealias);
    let mut u_hat = u0.spectrum();
    let mut pending = Vec::new();
    lawson_rk4(
        &grid,
        &mut u_hat,
        &sched,
        u0.linf_norm(),
        |v, t, _, out| kernel.eval(v, t, out),
        |m, v| {
            if m % cfg.record_every == 0 || m == sched.steps {
                pending.push(FieldState::from_spectrum(&grid, v.to_vec(), sched.time(m))?);
            }
            Ok(())
        },
    )?;
    for s in pending {
        traj.push(s)?;
    }
    Ok(traj)
}

/// Evolve the regularized law from `P_{<k} u0`.
pub fn evolve_regularized(u0: &FieldState, p: &ModelParams, t_final: f64, cfg: &StepConfig) -> Result<Trajectory> {
    let reg = p
        .regularization
        .ok_or_else(|| Error::InvalidParams("evolve_regularized needs a regularization".into()))?;
    let start = u0.apply_real_multiplier(&lp::below_multiplier(u0.grid(), reg.k))?;
    evolve(&start, p, t_final, cfg)
}

/// Exact free Schrödinger flow `e^{i(t − t0)∂_x²} u0`.
pub fn free_evolution(u0: &FieldState, t: f64) -> Result<FieldState> {
    let tau = t - u0.time();
    let factor = linear_factor(u0.grid(), tau);
    let spec = u0
        .spectrum()
        .iter()
        .zip(&factor)
        .map(|(z, e)| z * e)
        .collect();
    FieldState::from_spectrum(u0.grid(), spec, t)
}

/// All Picard iterates `u^{(0)} = 0, u^{(1)}, …` and the differences
/// `d_n = ‖u^{(n+1)} − u^{(n)}‖_{L^∞_T L²}` (sup over every time step).
#[derive(Clone, Debug)]
pub struct PicardRun {
    pub iterates: Vec<Trajectory>,
    pub differences: Vec<f64>,
}

impl PicardRun {
    /// `d_{n+1} / d_n`.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn final_iterate(&self) -> &Trajectory {
        self.iterates.last().expect("at least the zero iterate")
    }
}

/// Cubic interpolation weights for the midpoint of `[t_m, t_{m+1}]`.
fn midpoint_stencil(m: usize, steps: usize) -> ([usize; 4], [f64; 4]) {
    if steps < 3 {
        let j = m.min(steps.saturating_sub(1));
        return ([j, j + 1, j + 1, j + 1], [0.5, 0.5, 0.0, 0.0]);
    }
    if m == 0 {
        ([0, 1, 2, 3], [5.0 / 16.0, 15.0 / 16.0, -5.0 / 16.0, 1.0 / 16.0])
    } else if m + 1 == steps {
        ([m - 2, m - 1, m, m + 1], [1.0 / 16.0, -5.0 / 16.0, 15.0 / 16.0, 5.0 / 16.0])
    } else {
        ([m - 1, m, m + 1, m + 2], [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0])
    }
}

/// Frozen coefficients `P_{<k}|v|^{2σ}` (and `|v|^{4σ}` when `b ≠ 0`) per step.
struct FrozenCoefficients {
    transport: Vec<Vec<f64>>,
    power: Option<Vec<Vec<f64>>>,
}

impl FrozenCoefficients {
    fn from_history(grid: &Grid, p: &ModelParams, history: &[Vec<Complex64>], low_pass: &[f64]) -> Self {
        let mut transport = Vec::with_capacity(history.len());
        let mut power = (p.b != 0.0).then(Vec::new);
        for u in history {
            let a: Vec<f64> = u.iter().map(|z| z.norm_sqr().powf(p.sigma)).collect();
            if let Some(pw) = power.as_mut() {
                pw.push(a.iter().map(|v| v * v).collect());
            }
            let mut spec: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid.forward_in_place(&mut spec);
            for (z, &w) in spec.iter_mut().zip(low_pass) {
                *z *= w;
            }
            grid.inverse_in_place(&mut spec);
            transport.push(spec.iter().map(|z| z.re).collect());
        }
        FrozenCoefficients { transport, power }
    }

    fn at(series: &[Vec<f64>], half_step: usize, steps: usize, out: &mut [f64]) {
        if half_step % 2 == 0 {
            out.copy_from_slice(&series[half_step / 2]);
            return;
        }
        let (idx, w) = midpoint_stencil(half_step / 2, steps);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|r| w[r] * series[idx[r]][i]).sum();
        }
    }
}

/// Picard construction for the regularized law: each iterate solves the
/// linear problem
///
/// ```text
///     u^{(n+1)}_t = i u^{(n+1)}_xx − s η P_{<k}|u^{(n)}|^{2σ} u^{(n+1)}_x
///                   + i b η |u^{(n)}|^{4σ} u^{(n+1)},   u^{(n+1)}(0) = P_{<k} u0
/// ```
///
/// starting from `u^{(0)} = 0`, with the previous iterate stored at every
/// step and interpolated (cubic) at the RK4 half-step stages.
pub fn picard_construct(
    u0: &FieldState,
    p: &ModelParams,
    t_final: f64,
    n_iter: usize,
    cfg: &StepConfig,
) -> Result<PicardRun> {
    p.validate()?;
    cfg.validate()?;
    ensure_finite(u0.values(), "initial data")?;
    let reg = p
        .regularization
        .ok_or_else(|| Error::InvalidParams("picard_construct needs a regularization".into()))?;
    let grid = u0.grid().clone();
    let n = grid.n();
    let low_pass = lp::below_multiplier(&grid, reg.k);
    let start = u0.apply_real_multiplier(&low_pass)?;
    let sched = Schedule::new(u0.time(), t_final, cfg.dt)?;
    let steps = sched.steps;
    let sign = p.convention.sign();
    let zero = Complex64::new(0.0, 0.0);
    let ik: Vec<Complex64> = (0..n)
        .map(|m| {
            if grid.is_nyquist(m) {
                zero
            } else {
                Complex64::new(0.0, grid.frequencies()[m])
            }
        })
        .collect();
    let mask = cfg.dealias.then(|| model::dealias_mask(&grid));
    let record = |m: usize| m % cfg.record_every == 0 || m == steps;

    let mut history: Vec<Vec<Complex64>> = vec![vec![zero; n]; steps + 1];
    let mut iterates = Vec::with_capacity(n_iter + 1);
    let zero_states = (0..=steps)
        .filter(|&m| record(m))
        .map(|m| FieldState::zeros(&grid, sched.time(m)))
        .collect();
    iterates.push(Trajectory::from_states(*p, zero_states)?);
    let mut differences: Vec<f64> = Vec::with_capacity(n_iter);

    for _ in 0..n_iter {
        let frozen = FrozenCoefficients::from_history(&grid, p, &history, &low_pass);
        let mut a = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut u = vec![zero; n];
        let mut ux = vec![zero; n];
        let rhs = |v: &[Complex64], t: f64, hs: usize, out: &mut [Complex64]| -> f64 {
            u.copy_from_slice(v);
            grid.inverse_in_place(&mut u);
            for ((d, &z), &w) in ux.iter_mut().zip(v).zip(&ik) {
                *d = z * w;
            }
            grid.inverse_in_place(&mut ux);
            let eta = reg.cutoff.eval(t);
            FrozenCoefficients::at(&frozen.transport, hs, steps, &mut a);
            if let Some(pw) = &frozen.power {
                FrozenCoefficients::at(pw, hs, steps, &mut q);
            }
            for i in 0..n {
                let mut val = -sign * eta * a[i] * ux[i];
                if frozen.power.is_some() {
                    val += Complex64::new(0.0, p.b * eta * q[i]) * u[i];
                }
                out[i] = val;
            }
            grid.forward_in_place(out);
            if let Some(mask) = &mask {
                for (o, &keep) in out.iter_mut().zip(mask) {
                    if !keep {
                        *o = zero;
                    }
                }
            }
            u.iter().map(|z| z.norm()).fold(0.0, f64::max)
        };

        let mut current: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);
        current.push(start.values().to_vec());
        let mut u_hat = start.spectrum();
        lawson_rk4(&grid, &mut u_hat, &sched, start.linf_norm(), rhs, |_, v| {
            current.push(grid.inverse(v));
            Ok(())
        })?;

        let d = current
            .iter()
            .zip(&history)
            .map(|(x, y)| l2_distance(x, y, grid.dx()))
            .fold(0.0, f64::max);
        differences.push(d);
        let k = differences.len();
        if k >= 3 && differences[k - 1] > differences[k - 2] && differences[k - 2] > differences[k - 3] {
            return Err(Error::Divergence(k - 2, k - 1));
        }

        let states = current
            .iter()
            .enumerate()
            .filter(|(m, _)| record(*m))
            .map(|(m, v)| FieldState::new(&grid, v.clone(), sched.time(m)))
            .collect::<Result<Vec<_>>>()?;
        iterates.push(Trajectory::from_states(*p, states)?);
        history = current;
    }
    Ok(PicardRun {
        iterates,
        differences,
    })
}
