//! Evolution laws, conserved functionals and the scaling symmetry.
//!
//! Every law is written as `u_t = i u_xx + N(u, t)` with
//!
//! ```text
//!     N(u, t) = −s · a(u, t) · u_x + i b η(t) |u|^{4σ} u
//! ```
//!
//! where `s = −1` is the gDNLS form `i u_t + u_xx = i|u|^{2σ}u_x` and
//! `s = +1` the DNLSb form `i u_t + u_xx + i|u|^{2σ}u_x + b|u|^{4σ}u = 0`.
//! The transport coefficient is `a = |u|^{2σ}`, or `η(t) P_{<k}|u|^{2σ}` when
//! a regularization is attached.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ensure_finite, lp, FieldState, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `i u_t + u_xx = i|u|^{2σ} u_x` (sign −1)
    Gdnls,
    /// `i u_t + u_xx + i|u|^{2σ} u_x + b|u|^{4σ} u = 0` (sign +1)
    Dnlsb,
}

impl Convention {
    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            -1 => Ok(Convention::Gdnls),
            1 => Ok(Convention::Dnlsb),
            other => Err(Error::InvalidParams(format!("sign must be -1 or +1, got {other}"))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Convention::Gdnls => -1.0,
            Convention::Dnlsb => 1.0,
        }
    }
}

/// Smooth time cutoff: 1 on `|t| ≤ inner`, 0 on `|t| ≥ outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for TimeCutoff {
    fn default() -> Self {
        TimeCutoff {
            inner: 1.0,
            outer: 2.0,
        }
    }
}

impl TimeCutoff {
    pub fn eval(&self, t: f64) -> f64 {
        if self.inner == f64::INFINITY {
            return 1.0;
        }
        lp::smooth_drop((t.abs() - self.inner) / (self.outer - self.inner))
    }

    /// Always on; used to switch the cutoff off inside a window.
    pub fn never() -> Self {
        TimeCutoff {
            inner: f64::INFINITY,
            outer: f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inner == f64::INFINITY && self.outer == f64::INFINITY {
            return Ok(());
        }
        if !(self.inner >= 0.0 && self.outer > self.inner && self.outer.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time cutoff needs 0 <= inner < outer, got {} / {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }
}

/// Frequency truncation `P_{<k}` of the coefficient plus the time cutoff `η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub k: u32,
    #[serde(default)]
    pub cutoff: TimeCutoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    #[serde(default)]
    pub b: f64,
    pub convention: Convention,
    #[serde(default)]
    pub regularization: Option<Regularization>,
    /// Permit `σ ≤ 1/2`, where `|z|^{2σ}` is not C¹ at zeros.
    #[serde(default)]
    pub unsafe_sigma: bool,
}

impl ModelParams {
    pub fn gdnls(sigma: f64) -> Self {
        ModelParams {
            sigma,
            b: 0.0,
            convention: Convention::Gdnls,
            regularization: None,
            unsafe_sigma: false,
        }
    }

    pub fn dnlsb(sigma: f64, b: f64) -> Self {
        ModelParams {
            b,
            convention: Convention::Dnlsb,
            ..Self::gdnls(sigma)
        }
    }

    pub fn with_regularization(mut self, k: u32, cutoff: TimeCutoff) -> Self {
        self.regularization = Some(Regularization { k, cutoff });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParams(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.sigma <= 0.5 && !self.unsafe_sigma {
            return Err(Error::InvalidParams(format!(
                "sigma = {} <= 1/2 requires the unsafe-sigma override",
                self.sigma
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::NonFinite("b"));
        }
        if let Some(reg) = &self.regularization {
            reg.cutoff.validate()?;
        }
        Ok(())
    }

    /// `η(t)` of the attached regularization, 1 otherwise.
    pub fn eta(&self, t: f64) -> f64 {
        self.regularization.map_or(1.0, |r| r.cutoff.eval(t))
    }
}

/// Evaluates `N(u, t)` on spectra, reusing scratch buffers.
pub(crate) struct NonlinearityKernel {
    grid: Grid,
    params: ModelParams,
    ik: Vec<Complex64>,
    low_pass: Option<Vec<f64>>,
    dealias: Option<Vec<bool>>,
    u: Vec<Complex64>,
    ux: Vec<Complex64>,
    coef: Vec<Complex64>,
}

impl NonlinearityKernel {
    pub fn new(grid: &Grid, params: ModelParams, dealias: bool) -> Self {
        let n = grid.n();
        let ik = (0..n)
            .map(|m| {
                if grid.is_nyquist(m) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, grid.frequencies()[m])
                }
            })
            .collect();
        let low_pass = params.regularization.map(|r| lp::below_multiplier(grid, r.k));
        let dealias = dealias.then(|| dealias_mask(grid));
        NonlinearityKernel {
            grid: grid.clone(),
            params,
            ik,
            low_pass,
            dealias,
            u: vec![Complex64::new(0.0, 0.0); n],
            ux: vec![Complex64::new(0.0, 0.0); n],
            coef: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Write `N̂` into `out`; returns `sup|u|` of the input.
    pub fn eval(&mut self, u_hat: &[Complex64], t: f64, out: &mut [Complex64]) -> f64 {
        let p = self.params;
        self.u.copy_from_slice(u_hat);
        self.grid.inverse_in_place(&mut self.u);
        for ((d, &z), &ik) in self.ux.iter_mut().zip(u_hat).zip(&self.ik) {
            *d = z * ik;
        }
        self.grid.inverse_in_place(&mut self.ux);

        let eta = p.eta(t);
        let mut linf: f64 = 0.0;
        for (c, z) in self.coef.iter_mut().zip(&self.u) {
            let r2 = z.norm_sqr();
            linf = linf.max(r2);
            *c = Complex64::new(r2.powf(p.sigma), 0.0);
        }
        let power = (p.b != 0.0).then(|| self.coef.iter().map(|c| c.re * c.re).collect::<Vec<_>>());
        if let Some(m) = &self.low_pass {
            self.grid.forward_in_place(&mut self.coef);
            for (c, &w) in self.coef.iter_mut().zip(m) {
                *c *= w;
            }
            self.grid.inverse_in_place(&mut self.coef);
        }

        let s = p.convention.sign();
        for (m, o) in out.iter_mut().enumerate() {
            let a = eta * self.coef[m].re;
            let mut v = -s * a * self.ux[m];
            if let Some(pw) = &power {
                v += Complex64::new(0.0, p.b * eta * pw[m]) * self.u[m];
            }
            *o = v;
        }
        self.grid.forward_in_place(out);
        if let Some(mask) = &self.dealias {
            for (o, &keep) in out.iter_mut().zip(mask) {
                if !keep {
                    *o = Complex64::new(0.0, 0.0);
                }
            }
        }
        linf.sqrt()
    }
}

/// 2/3-rule mask over FFT slots.
pub(crate) fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let cut = grid.n() as i64 / 3;
    (0..grid.n()).map(|m| grid.wavenumber(m).abs() <= cut).collect()
}

/// `N(u, t)` such that `u_t = i u_xx + N(u, t)`; no dealiasing.
pub fn nonlinearity(u: &FieldState, p: &ModelParams, t: f64) -> Result<FieldState> {
    p.validate()?;
    ensure_finite(u.values(), "nonlinearity input")?;
    let mut kernel = NonlinearityKernel::new(u.grid(), *p, false);
    let mut out = vec![Complex64::new(0.0, 0.0); u.grid().n()];
    kernel.eval(&u.spectrum(), t, &mut out);
    FieldState::from_spectrum(u.grid(), out, u.time())
}

/// Full right-hand side `i u_xx + N(u, t)`.
pub fn rhs(u: &FieldState, p: &ModelParams, t: f64) -> Result<FieldState> {
    let n = nonlinearity(u, p, t)?;
    let mut lin = u.spectrum();
    u.grid().differentiate_spectrum(&mut lin, 2);
    let lin = FieldState::from_spectrum(u.grid(), lin, u.time())?;
    lin.scale(Complex64::i())?.add(&n)
}

/// `M(u) = ½∫|u|²`.
pub fn mass(u: &FieldState) -> f64 {
    0.5 * u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * u.grid().dx()
}

/// `P(u) = ½ Re ∫ i ū u_x`.
pub fn momentum(u: &FieldState) -> f64 {
    let ux = u.grid().derivative(u.values());
    let dx = u.grid().dx();
    0.5 * u
        .values()
        .iter()
        .zip(&ux)
        .map(|(z, d)| (Complex64::i() * z.conj() * d).re)
        .sum::<f64>()
        * dx
}

/// Conserved Hamiltonian of the chosen convention:
///
/// ```text
///     E(u) = ½∫|u_x|² − s/(2σ+2) Re∫ i|u|^{2σ} ū u_x − b/(4σ+2) ∫|u|^{4σ+2}
/// ```
///
/// With `s = −1`, `b = 0` this is the usual gDNLS energy.
pub fn energy(u: &FieldState, p: &ModelParams) -> f64 {
    let ux = u.grid().derivative(u.values());
    let dx = u.grid().dx();
    let sigma = p.sigma;
    let s = p.convention.sign();
    let mut kinetic = 0.0;
    let mut transport = 0.0;
    let mut power = 0.0;
    for (z, d) in u.values().iter().zip(&ux) {
        let r2 = z.norm_sqr();
        kinetic += d.norm_sqr();
        let a = r2.powf(sigma);
        transport += (Complex64::i() * a * z.conj() * d).re;
        if p.b != 0.0 {
            power += a * a * r2;
        }
    }
    (0.5 * kinetic - s / (2.0 * sigma + 2.0) * transport - p.b / (4.0 * sigma + 2.0) * power) * dx
}

/// `s_c = 1/2 − 1/(2σ)`, the Sobolev index left invariant by scaling.
pub fn critical_index(sigma: f64) -> f64 {
    0.5 - 0.5 / sigma
}

/// `u_λ(t, x) = λ^{1/(2σ)} u(λ²t, λx)`.
///
/// Samples are carried over to a grid of the same size and length `L/λ`, on
/// which the rescaled function is sampled exactly; the snapshot time becomes
/// `t/λ²`.
pub fn rescale(u: &FieldState, lambda: f64, sigma: f64) -> Result<FieldState> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda = {lambda} must be positive")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParams(format!("sigma = {sigma} must be positive")));
    }
    let grid = Grid::new(u.grid().n(), u.grid().length() / lambda)?;
    let amp = lambda.powf(0.5 / sigma);
    let values = u.values().iter().map(|z| z * amp).collect();
    FieldState::new(&grid, values, u.time() / (lambda * lambda))
}

/// [`rescale`] followed by spectral resampling onto `n_out` points.
///
/// Fails when the field carries more than `1e-12` (relative L²) of its
/// content above the target Nyquist frequency.
pub fn rescale_resampled(u: &FieldState, lambda: f64, sigma: f64, n_out: usize) -> Result<FieldState> {
    let scaled = rescale(u, lambda, sigma)?;
    resample(&scaled, n_out)
}

/// Trigonometric interpolation of `u` onto a grid with the same length and `n_out` points.
pub fn resample(u: &FieldState, n_out: usize) -> Result<FieldState> {
    let target = Grid::new(n_out, u.grid().length())?;
    let n_in = u.grid().n();
    let spec = u.spectrum();
    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let half = (n_out.min(n_in) / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n_out];
    let mut dropped = 0.0;
    for (m, z) in spec.iter().enumerate() {
        let k = u.grid().wavenumber(m);
        // keep strictly inside the smaller Nyquist; the shared Nyquist slot is dropped
        if k.abs() < half {
            let slot = if k >= 0 { k as usize } else { (n_out as i64 + k) as usize };
            out[slot] = z * (n_out as f64 / n_in as f64);
        } else {
            dropped += z.norm_sqr();
        }
    }
    if total > 0.0 && (dropped / total).sqrt() > 1e-12 {
        return Err(Error::Unresolved((dropped / total).sqrt()));
    }
    FieldState::from_spectrum(&target, out, u.time())
}
