//! Littlewood-Paley projections on the periodic grid.
//!
//! The low-pass symbol `ϕ0` equals 1 on `|ξ| ≤ 1`, vanishes for
//! `|ξ| ≥ 7/6` and ramps down with a cosine smoothstep in between. Block
//! symbols are formed by exact differences, `ϕ_j(ξ) = ϕ0(2^{-j}ξ) −
//! ϕ0(2^{1-j}ξ)`, so any finite sum of blocks telescopes to a difference of
//! two low-pass symbols.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{FieldState, Grid};
use crate::error::{Error, Result};

/// Outer edge of the `ϕ0` transition.
pub const PHI0_EDGE: f64 = 7.0 / 6.0;

/// Cosine smoothstep from 1 (at `s ≤ 0`) down to 0 (at `s ≥ 1`).
pub fn smooth_drop(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * s).cos())
    }
}

/// The low-pass symbol `ϕ0(ξ)`.
pub fn phi0(xi: f64) -> f64 {
    smooth_drop((xi.abs() - 1.0) / (PHI0_EDGE - 1.0))
}

/// `ϕ0(2^{-j} ξ)`, the symbol of `P_{≤j}`; defined for any integer `j`.
pub fn low_pass_symbol(xi: f64, j: i32) -> f64 {
    phi0(xi * 2f64.powi(-j))
}

/// Symbol of `P_j` for `j ≥ 1`, or of `P_{≤0}` for `j = 0`.
pub fn block_symbol(xi: f64, j: u32) -> f64 {
    if j == 0 {
        phi0(xi)
    } else {
        low_pass_symbol(xi, j as i32) - low_pass_symbol(xi, j as i32 - 1)
    }
}

/// Symbol of `P_{<k} = P_{≤0} + Σ_{0<j<k} P_j`; zero for `k = 0`.
pub fn below_symbol(xi: f64, k: u32) -> f64 {
    if k == 0 {
        0.0
    } else {
        low_pass_symbol(xi, k as i32 - 1)
    }
}

/// `P_{<k}` sampled on a grid, with no restriction on `k`.
pub fn below_multiplier(grid: &Grid, k: u32) -> Vec<f64> {
    grid.frequencies().iter().map(|&xi| below_symbol(xi, k)).collect()
}

/// Which frequency pieces a projection keeps. `P_0` means `P_{≤0}` throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpBand {
    /// `P_{≤0}`
    Leq0,
    /// `P_j`
    Block(u32),
    /// `P_a + … + P_b` (inclusive)
    Range(u32, u32),
    /// `P_{≥j} = I − P_{<j}`; includes everything above the ladder.
    Geq(u32),
    /// `P_{<k}`
    Below(u32),
    /// `P̃_j = P_{[j−w, j+w]}`, clipped to the ladder.
    Fattened { center: u32, width: u32 },
}

/// Sampled Littlewood-Paley multipliers for one grid.
#[derive(Clone, Debug)]
pub struct LpLadder {
    grid: Grid,
    j_max: u32,
    phi0: Vec<f64>,
    blocks: Vec<Vec<f64>>,
}

impl LpLadder {
    /// Ladder resolving blocks up to `j_max = ⌊log2(nπ/L)⌋ − 1`.
    pub fn new(grid: &Grid) -> Self {
        let top = (grid.nyquist().log2().floor() as i64 - 1).max(0) as u32;
        Self::with_j_max(grid, top)
    }

    pub fn with_j_max(grid: &Grid, j_max: u32) -> Self {
        let freqs = grid.frequencies();
        let phi0: Vec<f64> = freqs.iter().map(|&xi| phi0(xi)).collect();
        let blocks = (1..=j_max)
            .map(|j| freqs.iter().map(|&xi| block_symbol(xi, j)).collect())
            .collect();
        LpLadder {
            grid: grid.clone(),
            j_max,
            phi0,
            blocks,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    /// Sampled symbol of `P_j` (`j = 0` gives `P_{≤0}`).
    pub fn block(&self, j: u32) -> Result<&[f64]> {
        self.check(j)?;
        Ok(if j == 0 {
            &self.phi0
        } else {
            &self.blocks[j as usize - 1]
        })
    }

    fn check(&self, j: u32) -> Result<()> {
        if j > self.j_max {
            Err(Error::OutOfRange {
                what: "Littlewood-Paley",
                index: j as i64,
                min: 0,
                max: self.j_max as i64,
            })
        } else {
            Ok(())
        }
    }

    /// Sampled symbol of a band.
    pub fn multiplier(&self, band: LpBand) -> Result<Vec<f64>> {
        let freqs = self.grid.frequencies();
        let sample = |f: &dyn Fn(f64) -> f64| freqs.iter().map(|&xi| f(xi)).collect::<Vec<_>>();
        Ok(match band {
            LpBand::Leq0 => self.phi0.clone(),
            LpBand::Block(j) => self.block(j)?.to_vec(),
            LpBand::Range(a, b) => {
                self.check(a)?;
                self.check(b)?;
                if a > b {
                    return Err(Error::InvalidParams(format!("empty range {a}..{b}")));
                }
                sample(&|xi| range_symbol(xi, a, b))
            }
            LpBand::Geq(j) => {
                self.check(j)?;
                sample(&|xi| 1.0 - below_symbol(xi, j))
            }
            LpBand::Below(k) => {
                if k > self.j_max + 1 {
                    return Err(Error::OutOfRange {
                        what: "Littlewood-Paley",
                        index: k as i64,
                        min: 0,
                        max: self.j_max as i64 + 1,
                    });
                }
                sample(&|xi| below_symbol(xi, k))
            }
            LpBand::Fattened { center, width } => {
                self.check(center)?;
                let a = center.saturating_sub(width);
                let b = (center + width).min(self.j_max);
                sample(&|xi| range_symbol(xi, a, b))
            }
        })
    }

    pub fn project(&self, u: &FieldState, band: LpBand) -> Result<FieldState> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let m = self.multiplier(band)?;
        u.apply_real_multiplier(&m)
    }

    /// All blocks `P_{≤0}u, P_1u, …, P_{j_max}u` from one forward transform.
    pub fn decompose(&self, u: &FieldState) -> Result<Vec<FieldState>> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let spec = u.spectrum();
        (0..=self.j_max)
            .map(|j| {
                let m = self.block(j)?;
                let s: Vec<Complex64> = spec.iter().zip(m).map(|(z, &w)| z * w).collect();
                FieldState::from_spectrum(&self.grid, s, u.time())
            })
            .collect()
    }

    /// `[P_j, f] g = P_j(f g) − f P_j g` for real `f`.
    pub fn commutator(&self, f: &FieldState, g: &FieldState, j: u32) -> Result<FieldState> {
        f.check_same_grid(g)?;
        let band = LpBand::Block(j);
        let fg = FieldState::new(
            g.grid(),
            f.values().iter().zip(g.values()).map(|(a, b)| a.re * b).collect(),
            g.time(),
        )?;
        let pg = self.project(g, band)?;
        let p_fg = self.project(&fg, band)?;
        let values = p_fg
            .values()
            .iter()
            .zip(f.values().iter().zip(pg.values()))
            .map(|(a, (fv, b))| a - fv.re * b)
            .collect();
        FieldState::new(g.grid(), values, g.time())
    }
}

fn range_symbol(xi: f64, a: u32, b: u32) -> f64 {
    let top = low_pass_symbol(xi, b as i32);
    if a == 0 {
        top
    } else {
        top - low_pass_symbol(xi, a as i32 - 1)
    }
}
