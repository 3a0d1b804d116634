//! Gauge transforms `w = e^{iΦ}u` with `Φ = −½ ∂_x^{-1}|u|^{2σ}`, the
//! frequency- and amplitude-gated partial gauge, and a residual check of the
//! transformed equation
//!
//! ```text
//!     i w_t + w_xx = (−Φ_t + iΦ_xx − Φ_x²) w.
//! ```
//!
//! On the torus `∂_x^{-1}f` is not periodic when `f` has nonzero mean, so a
//! phase is stored as `offset + ramp·(x + L/2) + periodic(x)` with the
//! periodic part mean-zero, normalized so that `Φ(−L/2) = 0`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::model::Convention;
use crate::spectral::lp::{smooth_drop, LpBand, LpLadder};
use crate::spectral::{l2_norm, FieldState, Grid};

/// A non-periodic real phase on the torus.
#[derive(Clone, Debug)]
pub struct GaugePhase {
    ramp_slope: f64,
    offset: f64,
    /// Spectrum of the mean-zero periodic part.
    periodic_hat: Vec<Complex64>,
    grid: Grid,
}

impl GaugePhase {
    fn zero(grid: &Grid) -> Self {
        GaugePhase {
            ramp_slope: 0.0,
            offset: 0.0,
            periodic_hat: vec![Complex64::new(0.0, 0.0); grid.n()],
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Mean of the integrand; the slope of the linear part.
    pub fn ramp_slope(&self) -> f64 {
        self.ramp_slope
    }

    /// The mean-zero periodic part sampled on the grid.
    pub fn periodic_part(&self) -> Vec<f64> {
        self.grid.inverse(&self.periodic_hat).iter().map(|z| z.re).collect()
    }

    /// `Φ(x_m)`.
    pub fn values(&self) -> Vec<f64> {
        let per = self.periodic_part();
        self.grid
            .points()
            .zip(per)
            .map(|(x, p)| self.offset + self.ramp_slope * (x + 0.5 * self.grid.length()) + p)
            .collect()
    }

    /// `Φ_x`, exact from the decomposition.
    pub fn derivative(&self) -> Vec<f64> {
        self.periodic_derivative(1).into_iter().map(|d| d + self.ramp_slope).collect()
    }

    /// `Φ_xx`; the ramp contributes nothing.
    pub fn second_derivative(&self) -> Vec<f64> {
        self.periodic_derivative(2)
    }

    fn periodic_derivative(&self, order: u32) -> Vec<f64> {
        let mut spec = self.periodic_hat.clone();
        self.grid.differentiate_spectrum(&mut spec, order);
        self.grid.inverse(&spec).iter().map(|z| z.re).collect()
    }

    /// `Φ(L/2) − Φ(−L/2)`, the phase jump across the periodic seam.
    pub fn boundary_mismatch(&self) -> f64 {
        self.ramp_slope * self.grid.length()
    }

    fn scaled(mut self, c: f64) -> Self {
        self.ramp_slope *= c;
        self.offset *= c;
        for z in &mut self.periodic_hat {
            *z *= c;
        }
        self
    }

    /// `e^{iΦ} u`.
    pub fn apply(&self, u: &FieldState) -> Result<FieldState> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let phi = self.values();
        let values = u
            .values()
            .iter()
            .zip(phi)
            .map(|(z, p)| z * Complex64::from_polar(1.0, p))
            .collect();
        FieldState::new(&self.grid, values, u.time())
    }
}

/// `∫_{−L/2}^x f` for the real part of `f`.
pub fn antiderivative(f: &FieldState) -> GaugePhase {
    let grid = f.grid();
    let n = grid.n();
    let real: Vec<Complex64> = f.values().iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    let mut spec = grid.forward(&real);
    let mean = spec[0].re / n as f64;
    spec[0] = Complex64::new(0.0, 0.0);
    for (m, (z, &xi)) in spec.iter_mut().zip(grid.frequencies()).enumerate() {
        if m == 0 || grid.is_nyquist(m) {
            *z = Complex64::new(0.0, 0.0);
        } else {
            *z /= Complex64::new(0.0, xi);
        }
    }
    let mut phase = GaugePhase {
        ramp_slope: mean,
        offset: 0.0,
        periodic_hat: spec,
        grid: grid.clone(),
    };
    phase.offset = -phase.periodic_part()[0];
    phase
}

/// The bump `φ` (1 on `[−1, 1]`, 0 outside `(−2, 2)`) and `χ = 1 − φ`,
/// dilated to scale `2^{−j}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeCutoffs {
    j: i32,
}

impl AmplitudeCutoffs {
    pub fn new(j: i32) -> Self {
        AmplitudeCutoffs { j }
    }

    pub fn j(&self) -> i32 {
        self.j
    }

    pub fn phi(s: f64) -> f64 {
        smooth_drop(s.abs() - 1.0)
    }

    pub fn chi(s: f64) -> f64 {
        1.0 - Self::phi(s)
    }

    /// `φ_j(s) = φ(2^j s)`.
    pub fn phi_j(&self, s: f64) -> f64 {
        Self::phi(s * 2f64.powi(self.j))
    }

    /// `χ_j(s) = 1 − φ_j(s)`.
    pub fn chi_j(&self, s: f64) -> f64 {
        1.0 - self.phi_j(s)
    }
}

fn power_integrand(u: &FieldState, sigma: f64, gate: impl Fn(f64) -> f64) -> Result<FieldState> {
    let values = u
        .values()
        .iter()
        .map(|z| {
            let m2 = z.norm_sqr();
            Complex64::new(gate(m2) * m2.powf(sigma), 0.0)
        })
        .collect();
    FieldState::new(u.grid(), values, u.time())
}

/// `w = e^{iΦ}u` with `Φ = −½ ∂_x^{-1}|u|^{2σ}`.
pub fn full_gauge(u: &FieldState, sigma: f64) -> Result<(FieldState, GaugePhase)> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!("σ must be positive, got {sigma}")));
    }
    let phase = antiderivative(&power_integrand(u, sigma, |_| 1.0)?).scaled(-0.5);
    Ok((phase.apply(u)?, phase))
}

/// `w_j = e^{iΦ_j} P_j u` with `Φ_j = −½ ∂_x^{-1} P_{<j−4}[χ_j(|u|²)|u|^{2σ}]`.
///
/// The frequency gate acts on the integrand before antidifferentiation;
/// since `P_{<j−4}` keeps the mean, the ramp is unaffected.
pub fn partial_gauge(
    u: &FieldState,
    sigma: f64,
    j: u32,
    ladder: &LpLadder,
) -> Result<(FieldState, GaugePhase)> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!("σ must be positive, got {sigma}")));
    }
    if j < 5 || j > ladder.j_max() {
        return Err(Error::OutOfRange {
            what: "partial gauge",
            index: j as i64,
            min: 5,
            max: ladder.j_max() as i64,
        });
    }
    let u_j = ladder.project(u, LpBand::Block(j))?;
    let cut = AmplitudeCutoffs::new(j as i32);
    let gated = power_integrand(u, sigma, |s| cut.chi_j(s))?;
    if gated.values().iter().all(|z| z.re == 0.0) {
        return Ok((u_j, GaugePhase::zero(u.grid())));
    }
    let low = ladder.project(&gated, LpBand::Below(j - 4))?;
    let phase = antiderivative(&low).scaled(-0.5);
    Ok((phase.apply(&u_j)?, phase))
}

/// `‖R(t)‖_{L²}` at interior snapshots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugeResidual {
    pub t: Vec<f64>,
    pub residual_l2: Vec<f64>,
}

impl GaugeResidual {
    pub fn max(&self) -> f64 {
        self.residual_l2.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,residual_l2")?;
        for (t, r) in self.t.iter().zip(&self.residual_l2) {
            writeln!(out, "{t:.16e},{r:.16e}")?;
        }
        Ok(())
    }
}

const STENCIL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// Residual of the gauge-transformed equation along a gDNLS trajectory
/// (`b = 0`, no regularization). Time derivatives of `w` and `Φ` use
/// fourth-order central differences over snapshots, so the trajectory needs
/// uniform spacing and at least five snapshots; space derivatives are
/// spectral, with `w_xx` assembled from `u` and the phase decomposition.
pub fn gauge_residual(traj: &Trajectory) -> Result<GaugeResidual> {
    let p = traj.params();
    if p.convention != Convention::Gdnls || p.b != 0.0 || p.regularization.is_some() {
        return Err(Error::InvalidParams(
            "gauge residual needs an unregularized gDNLS trajectory with b = 0".into(),
        ));
    }
    if traj.len() < 5 {
        return Err(Error::InsufficientSnapshots {
            needed: 5,
            got: traj.len(),
        });
    }
    let h = traj.uniform_spacing()?;
    let grid = traj.grid().expect("nonempty").clone();
    let sigma = p.sigma;

    let gauged: Vec<(FieldState, GaugePhase)> = traj
        .states()
        .iter()
        .map(|u| full_gauge(u, sigma))
        .collect::<Result<_>>()?;
    let phis: Vec<Vec<f64>> = gauged.iter().map(|(_, ph)| ph.values()).collect();

    let mut out = GaugeResidual::default();
    for m in 2..traj.len() - 2 {
        let u = &traj.states()[m];
        let (w, phase) = &gauged[m];
        let mut u_hat = u.spectrum();
        let mut u_x = u_hat.clone();
        grid.differentiate_spectrum(&mut u_x, 1);
        let u_x = grid.inverse(&u_x);
        grid.differentiate_spectrum(&mut u_hat, 2);
        let u_xx = grid.inverse(&u_hat);
        let phi_x = phase.derivative();
        let phi_xx = phase.second_derivative();
        let phi = &phis[m];

        let residual: Vec<Complex64> = (0..grid.n())
            .map(|i| {
                let mut w_t = Complex64::new(0.0, 0.0);
                let mut phi_t = 0.0;
                for (k, &c) in STENCIL.iter().enumerate() {
                    if c != 0.0 {
                        w_t += c * gauged[m + k - 2].0.values()[i];
                        phi_t += c * phis[m + k - 2][i];
                    }
                }
                w_t /= 12.0 * h;
                phi_t /= 12.0 * h;
                let i_ = Complex64::i();
                let px = phi_x[i];
                let pxx = phi_xx[i];
                let w_xx = Complex64::from_polar(1.0, phi[i])
                    * (u_xx[i] + 2.0 * i_ * px * u_x[i] + (i_ * pxx - px * px) * u.values()[i]);
                let potential = Complex64::new(-phi_t - px * px, pxx);
                i_ * w_t + w_xx - potential * w.values()[i]
            })
            .collect();
        out.t.push(u.time());
        out.residual_l2.push(l2_norm(&residual, grid.dx()));
    }
    Ok(out)
}
