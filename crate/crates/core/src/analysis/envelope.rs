use std::io::Write;

use serde::{Deserialize, Serialize};

use super::norms::{mixed_norm, sobolev_norm, MixedNormSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::integrators::Trajectory;
use crate::spectral::{DerivativeKind, FieldState, LpLadder};

/// Relative slack allowed in envelope inequalities for floating-point rounding.
pub const ENVELOPE_SLACK: f64 = 1e-14;

/// The space `X` an envelope is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "norm")]
pub enum NormSelector {
    L2,
    Sobolev { s: f64, kind: DerivativeKind },
    /// Any mixed space-time norm; trajectories only.
    Mixed { spec: MixedNormSpec },
}

impl NormSelector {
    /// Fourier-weighted `L²` norms are dominated by their blocks' squares.
    fn is_fourier_l2(&self) -> bool {
        !matches!(self, NormSelector::Mixed { .. })
    }

    fn of_field(&self, u: &FieldState) -> Result<f64> {
        match *self {
            NormSelector::L2 => Ok(u.l2_norm()),
            NormSelector::Sobolev { s, kind } => Ok(sobolev_norm(u, s, kind)),
            NormSelector::Mixed { .. } => Err(Error::InvalidParams(
                "mixed space-time norms need a trajectory".into(),
            )),
        }
    }

    /// Single-time norms become `sup_t` over snapshots.
    fn of_trajectory(&self, traj: &Trajectory) -> Result<f64> {
        match self {
            NormSelector::Mixed { spec } => mixed_norm(traj, spec),
            _ => traj
                .states()
                .iter()
                .map(|u| self.of_field(u))
                .try_fold(0.0f64, |acc, v| Ok(acc.max(v?))),
        }
    }
}

pub enum EnvelopeSource<'a> {
    Field(&'a FieldState),
    Trajectory(&'a Trajectory),
}

impl<'a> From<&'a FieldState> for EnvelopeSource<'a> {
    fn from(u: &'a FieldState) -> Self {
        EnvelopeSource::Field(u)
    }
}

impl<'a> From<&'a Trajectory> for EnvelopeSource<'a> {
    fn from(t: &'a Trajectory) -> Self {
        EnvelopeSource::Trajectory(t)
    }
}

/// `a_j = 2^{−δj} + ‖u‖_X^{−1} max_k 2^{−δ|j−k|} ‖P_k u‖_X`, `j = 0..=j_max`,
/// with `P_0 = P_{≤0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyEnvelope {
    pub delta: f64,
    pub values: Vec<f64>,
    pub block_norms: Vec<f64>,
    pub total_norm: f64,
    pub norm_used: NormSelector,
    /// Upper bound for `Σ a_j²` fixed at construction.
    pub c_env: f64,
}

/// Outcome of checking the defining properties of an envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub admissible: bool,
    pub bounding: bool,
    pub slowly_varying: bool,
    pub square_sum: f64,
    pub square_summable: bool,
}

impl EnvelopeCheck {
    pub fn passed(&self) -> bool {
        self.admissible && self.bounding && self.slowly_varying && self.square_summable
    }
}

pub fn frequency_envelope<'a>(
    source: impl Into<EnvelopeSource<'a>>,
    ladder: &LpLadder,
    norm: NormSelector,
    delta: f64,
    exec: Execution,
) -> Result<FrequencyEnvelope> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams(format!("δ must be positive, got {delta}")));
    }
    let source = source.into();
    let blocks = 0..ladder.j_max() as usize + 1;
    let (total, block_norms, sup_in_time) = match source {
        EnvelopeSource::Field(u) => {
            let total = norm.of_field(u)?;
            let pieces = ladder.decompose(u)?;
            let norms = exec.map(&pieces, |p| norm.of_field(p));
            (total, norms.into_iter().collect::<Result<Vec<_>>>()?, false)
        }
        EnvelopeSource::Trajectory(traj) => {
            if traj.is_empty() {
                return Err(Error::InsufficientSnapshots { needed: 1, got: 0 });
            }
            let total = norm.of_trajectory(traj)?;
            let per_block = exec.map_range(blocks, |j| {
                let states = traj
                    .states()
                    .iter()
                    .map(|u| ladder.project(u, crate::LpBand::Block(j as u32)))
                    .collect::<Result<Vec<_>>>()?;
                norm.of_trajectory(&Trajectory::from_states(*traj.params(), states)?)
            });
            (total, per_block.into_iter().collect::<Result<Vec<_>>>()?, true)
        }
    };
    if !(total > 0.0) {
        return Err(Error::InvalidParams("envelope of the zero field is undefined".into()));
    }
    let js = block_norms.len();
    let values = (0..js)
        .map(|j| {
            let tail = (0..js)
                .map(|k| 2f64.powf(-delta * (j as f64 - k as f64).abs()) * block_norms[k])
                .fold(0.0, f64::max);
            2f64.powf(-delta * j as f64) + tail / total
        })
        .collect();
    // (Σ a_j²) ≤ 2Σ 2^{−2δj} + 2 Σ_k r_k² Σ_m 2^{−2δ|m|}, r_k = ‖P_k u‖/‖u‖.
    let q = 2f64.powf(-2.0 * delta);
    let s = if norm.is_fourier_l2() {
        if sup_in_time {
            js as f64
        } else {
            1.0
        }
    } else {
        block_norms.iter().map(|b| (b / total).powi(2)).sum::<f64>()
    };
    let c_env = 2.0 / (1.0 - q) + 2.0 * (1.0 + q) / (1.0 - q) * s;
    Ok(FrequencyEnvelope {
        delta,
        values,
        block_norms,
        total_norm: total,
        norm_used: norm,
        c_env,
    })
}

impl FrequencyEnvelope {
    pub fn check(&self) -> EnvelopeCheck {
        let a = &self.values;
        let tol = |x: f64| x * (1.0 + ENVELOPE_SLACK);
        let admissible = a[0] >= 1.0 && (!self.norm_used.is_fourier_l2() || a[0] <= tol(2.0));
        let bounding = self
            .block_norms
            .iter()
            .zip(a)
            .all(|(&b, &aj)| b <= tol(aj * self.total_norm));
        let slowly_varying = (0..a.len()).all(|j| {
            (0..a.len()).all(|k| a[j] <= tol(2f64.powf(self.delta * (j as f64 - k as f64).abs()) * a[k]))
        });
        let square_sum: f64 = a.iter().map(|v| v * v).sum();
        EnvelopeCheck {
            admissible,
            bounding,
            slowly_varying,
            square_sum,
            square_summable: square_sum <= self.c_env,
        }
    }

    /// The index where `a_j` peaks (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,a_j,block_norm")?;
        for (j, (a, b)) in self.values.iter().zip(&self.block_norms).enumerate() {
            writeln!(out, "{j},{a:.16e},{b:.16e}")?;
        }
        Ok(())
    }
}
