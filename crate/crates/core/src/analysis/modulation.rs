use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::spectral::lp::phi0;
use crate::spectral::LpLadder;

/// Snapshots at either end must be this small relative to the peak.
pub const COMPACT_EDGE: f64 = 1e-8;

/// Zero padding factor of the time window.
pub const TIME_PADDING: usize = 4;

/// Energy of `P_j u` split by temporal frequency: "low" is the band
/// `S_{[2j−w, 2j+w]}` around the paraboloid scale `|τ| ~ 2^{2j}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulationSplit {
    pub j: u32,
    pub width: u32,
    pub low: f64,
    pub high: f64,
    /// No energy in the block; fractions are reported as zero.
    pub empty: bool,
}

/// Symbol of `S_{[a, b]}` in `τ`, blocks clipped below at `S_{≤0}`.
fn band_symbol(tau: f64, a: i64, b: i64) -> f64 {
    let top = phi0(tau * 2f64.powi(-(b as i32)));
    if a <= 0 {
        top
    } else {
        top - phi0(tau * 2f64.powi(-(a as i32 - 1)))
    }
}

/// Space-time Fourier split of the block `P_j` of a time-compact trajectory.
pub fn modulation_split(traj: &Trajectory, ladder: &LpLadder, j: u32, width: u32) -> Result<ModulationSplit> {
    let block = ladder.block(j)?;
    if traj.len() < 2 {
        return Err(Error::InsufficientSnapshots {
            needed: 2,
            got: traj.len(),
        });
    }
    let dt = traj.uniform_spacing()?;
    let norms: Vec<f64> = traj.states().iter().map(|u| u.l2_norm()).collect();
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let empty = ModulationSplit {
        j,
        width,
        low: 0.0,
        high: 0.0,
        empty: true,
    };
    if peak == 0.0 {
        return Ok(empty);
    }
    let edge = norms[0].max(norms[norms.len() - 1]) / peak;
    if edge > COMPACT_EDGE {
        return Err(Error::NotCompact(edge));
    }

    let nt = TIME_PADDING * traj.len();
    let fft = FftPlanner::new().plan_fft_forward(nt);
    let spectra: Vec<Vec<Complex64>> = traj.states().iter().map(|u| u.spectrum()).collect();
    let taus: Vec<f64> = (0..nt)
        .map(|k| {
            let k = if k <= nt / 2 { k as i64 } else { k as i64 - nt as i64 };
            2.0 * PI * k as f64 / (nt as f64 * dt)
        })
        .collect();
    let lo = 2 * j as i64 - width as i64;
    let hi = 2 * j as i64 + width as i64;
    let weights: Vec<f64> = taus.iter().map(|&t| band_symbol(t, lo, hi)).collect();

    let mut low = 0.0;
    let mut total = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    for (m, &phi) in block.iter().enumerate() {
        if phi == 0.0 {
            continue;
        }
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (slot, s) in buf.iter_mut().zip(&spectra) {
            *slot = s[m] * phi;
        }
        fft.process(&mut buf);
        for (z, &w) in buf.iter().zip(&weights) {
            let e = z.norm_sqr();
            total += e;
            low += w * e;
        }
    }
    if total == 0.0 {
        return Ok(empty);
    }
    let low = low / total;
    Ok(ModulationSplit {
        j,
        width,
        low,
        high: 1.0 - low,
        empty: false,
    })
}

pub fn write_modulation_csv<W: Write>(rows: &[ModulationSplit], mut out: W) -> Result<()> {
    writeln!(out, "j,low_frac,high_frac")?;
    for r in rows {
        writeln!(out, "{},{:.16e},{:.16e}", r.j, r.low, r.high)?;
    }
    Ok(())
}
