//! Randomized ensemble audits: Bernstein brackets, the commutator bound,
//! and calibration of the energy lower bound. Every sample draws from its
//! own ChaCha stream, so results do not depend on the execution strategy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{self, ModelParams};
use crate::spectral::{fractional_derivative, DerivativeKind, FieldState, Grid, LpBand, LpLadder};

/// Generator for sample `index` of an ensemble seeded with `seed`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Shapes of random test fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RandomField {
    /// Independent complex Gaussian Fourier coefficients on every mode.
    White,
    /// Coefficients damped by `e^{−(ξ/scale)²}`.
    Smooth { scale: f64 },
    /// Real field with modes restricted to `|ξ| ≤ band`.
    LowReal { band: f64 },
}

impl RandomField {
    pub fn sample(&self, grid: &Grid, rng: &mut impl Rng) -> Result<FieldState> {
        let n = grid.n();
        let mut spec: Vec<Complex64> = grid
            .frequencies()
            .iter()
            .map(|&xi| {
                let w = match *self {
                    RandomField::White => 1.0,
                    RandomField::Smooth { scale } => (-(xi / scale).powi(2)).exp(),
                    RandomField::LowReal { band } => f64::from(xi.abs() <= band),
                };
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * w * n as f64
            })
            .collect();
        for m in 0..n {
            if grid.is_nyquist(m) {
                spec[m] = Complex64::new(0.0, 0.0);
            }
        }
        let u = FieldState::from_spectrum(grid, spec, 0.0)?;
        if let RandomField::LowReal { .. } = self {
            return u.map(|_, z| Complex64::new(z.re, 0.0));
        }
        Ok(u)
    }
}

/// Extremes of `‖D^s P_j u‖ / (2^{js}‖P_j u‖)` over blocks `1..=j_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub s: f64,
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BernsteinReport {
    pub fn within_bracket(&self) -> bool {
        self.lower <= self.min_ratio && self.max_ratio <= self.upper
    }
}

/// Support-edge bracket `[c, C]` for the Bernstein ratio.
pub fn bernstein_bracket(s: f64) -> (f64, f64) {
    let pos = s.max(0.0);
    (
        0.5f64.powf(s.abs()) * (6.0f64 / 7.0).powf(pos),
        2f64.powf(s.abs()) * (7.0f64 / 6.0).powf(pos),
    )
}

pub fn bernstein_audit(
    ladder: &LpLadder,
    s: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BernsteinReport> {
    if samples == 0 || ladder.j_max() == 0 {
        return Err(Error::InvalidParams("Bernstein audit needs samples and j_max ≥ 1".into()));
    }
    let grid = ladder.grid();
    let per_sample = exec.map_range(0..samples, |i| -> Result<(f64, f64)> {
        let mut rng = sample_rng(seed, i);
        let u = RandomField::White.sample(grid, &mut rng)?;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for j in 1..=ladder.j_max() {
            let pj = ladder.project(&u, LpBand::Block(j))?;
            let d = fractional_derivative(&pj, s, DerivativeKind::Homogeneous)?;
            let r = d.l2_norm() / (2f64.powf(j as f64 * s) * pj.l2_norm());
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((lo, hi))
    });
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for r in per_sample {
        let (lo, hi) = r?;
        min_ratio = min_ratio.min(lo);
        max_ratio = max_ratio.max(hi);
    }
    let (lower, upper) = bernstein_bracket(s);
    Ok(BernsteinReport {
        s,
        samples,
        min_ratio,
        max_ratio,
        lower,
        upper,
    })
}

/// Largest `‖[P_j, f]g‖ / (2^{−j}‖f_x‖_∞ ‖P̃_j g‖)` seen over the suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub samples: usize,
    pub f_band: f64,
    pub max_constant: f64,
}

/// Low-frequency real `f` (`|ξ| ≤ f_band`), white `g`, blocks `j` with
/// `2^{j−3} ≥ f_band`; `P̃_j` has width 2.
pub fn commutator_audit(
    ladder: &LpLadder,
    f_band: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<CommutatorReport> {
    let grid = ladder.grid();
    let j_min = (f_band.log2().ceil() as i64 + 3).max(1) as u32;
    if j_min > ladder.j_max() {
        return Err(Error::InvalidParams(format!(
            "no block j ≤ {} has 2^(j−3) ≥ {f_band}",
            ladder.j_max()
        )));
    }
    let per_sample = exec.map_range(0..samples, |i| -> Result<f64> {
        let mut rng = sample_rng(seed, i);
        let f = RandomField::LowReal { band: f_band }.sample(grid, &mut rng)?;
        let g = RandomField::White.sample(grid, &mut rng)?;
        let fx = f.derivative()?.linf_norm();
        let mut worst: f64 = 0.0;
        for j in j_min..=ladder.j_max() {
            let c = ladder.commutator(&f, &g, j)?.l2_norm();
            let g_fat = ladder.project(&g, LpBand::Fattened { center: j, width: 2 })?.l2_norm();
            worst = worst.max(c / (2f64.powi(-(j as i32)) * fx * g_fat));
        }
        Ok(worst)
    });
    let mut max_constant: f64 = 0.0;
    for c in per_sample {
        max_constant = max_constant.max(c?);
    }
    Ok(CommutatorReport {
        samples,
        f_band,
        max_constant,
    })
}

/// Ranges for the wave-packet ensemble `A e^{−(x−x0)²/(2w²)} e^{ikx}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketEnsemble {
    pub amplitude: (f64, f64),
    pub width: (f64, f64),
    pub wavenumber: (f64, f64),
}

impl Default for PacketEnsemble {
    fn default() -> Self {
        PacketEnsemble {
            amplitude: (0.2, 2.0),
            width: (0.5, 3.0),
            wavenumber: (-3.0, 3.0),
        }
    }
}

impl PacketEnsemble {
    pub fn sample(&self, grid: &Grid, rng: &mut impl Rng) -> Result<FieldState> {
        let a = rng.random_range(self.amplitude.0..=self.amplitude.1);
        let w = rng.random_range(self.width.0..=self.width.1);
        let k = rng.random_range(self.wavenumber.0..=self.wavenumber.1);
        let x0 = rng.random_range(-0.125..=0.125) * grid.length();
        FieldState::from_fn(grid, 0.0, |x| {
            let y = x - x0;
            Complex64::from_polar(a * (-y * y / (2.0 * w * w)).exp(), k * x)
        })
    }
}

/// Ensemble calibration of `E(u) ≥ ¼‖u_x‖² − C·M(u)^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyBoundReport {
    pub sigma: f64,
    pub exponent: f64,
    pub samples: usize,
    /// `max (¼‖u_x‖² − E)/M^p` over the ensemble.
    pub constant: f64,
    pub ratios: Vec<f64>,
}

/// The exponent `(1+σ)/(2(1−σ))` of the energy lower bound.
pub fn energy_bound_exponent(sigma: f64) -> f64 {
    (1.0 + sigma) / (2.0 * (1.0 - sigma))
}

pub fn energy_bound_audit(
    grid: &Grid,
    sigma: f64,
    exponent: f64,
    ensemble: &PacketEnsemble,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<EnergyBoundReport> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParams(format!("energy bound needs 0 < σ < 1, got {sigma}")));
    }
    let p = ModelParams {
        unsafe_sigma: true,
        ..ModelParams::gdnls(sigma)
    };
    let ratios = exec
        .map_range(0..samples, |i| -> Result<f64> {
            let mut rng = sample_rng(seed, i);
            let u = ensemble.sample(grid, &mut rng)?;
            let ux = u.derivative()?.l2_norm();
            let m = model::mass(&u);
            Ok((0.25 * ux * ux - model::energy(&u, &p)) / m.powf(exponent))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let constant = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EnergyBoundReport {
        sigma,
        exponent,
        samples,
        constant,
        ratios,
    })
}
