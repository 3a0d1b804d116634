use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::spectral::{fractional_derivative, fractional_symbol, DerivativeKind, FieldState};

/// `‖u‖_{H^s}` or `‖u‖_{Ḣ^s}` normalized to match `(∫|⟨D⟩^s u|²)^{1/2}`.
pub fn sobolev_norm(u: &FieldState, s: f64, kind: DerivativeKind) -> f64 {
    let g = u.grid();
    let n = g.n() as f64;
    let sum: f64 = u
        .spectrum()
        .iter()
        .zip(g.frequencies())
        .map(|(z, &xi)| fractional_symbol(xi, s, kind).powi(2) * z.norm_sqr())
        .sum();
    (sum * g.length() / (n * n)).sqrt()
}

/// Which variable carries the outer norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormOrder {
    /// `L^p_x L^q_T`
    SpaceOuter,
    /// `L^p_T L^q_x`
    TimeOuter,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "s")]
pub enum Derivative {
    #[default]
    None,
    Homogeneous(f64),
    Inhomogeneous(f64),
}

impl Derivative {
    pub fn apply(&self, u: &FieldState) -> Result<FieldState> {
        match *self {
            Derivative::None => Ok(u.clone()),
            Derivative::Homogeneous(s) => fractional_derivative(u, s, DerivativeKind::Homogeneous),
            Derivative::Inhomogeneous(s) => fractional_derivative(u, s, DerivativeKind::Inhomogeneous),
        }
    }
}

/// A mixed space-time norm; exponents may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub order: NormOrder,
    pub p_outer: f64,
    pub q_inner: f64,
    #[serde(default)]
    pub derivative: Derivative,
}

impl MixedNormSpec {
    pub fn new(order: NormOrder, p_outer: f64, q_inner: f64) -> Self {
        MixedNormSpec {
            order,
            p_outer,
            q_inner,
            derivative: Derivative::None,
        }
    }

    pub fn with_derivative(mut self, d: Derivative) -> Self {
        self.derivative = d;
        self
    }

    /// `L^∞_T L²_x`.
    pub fn linf_t_l2() -> Self {
        Self::new(NormOrder::TimeOuter, f64::INFINITY, 2.0)
    }

    fn time_exponent(&self) -> f64 {
        match self.order {
            NormOrder::SpaceOuter => self.q_inner,
            NormOrder::TimeOuter => self.p_outer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p_outer, self.q_inner] {
            if !(p >= 1.0) {
                return Err(Error::InvalidParams(format!("norm exponent {p} outside [1, ∞]")));
            }
        }
        Ok(())
    }
}

/// Discrete `L^p` with weight `h` per sample.
fn lp_sum(values: impl Iterator<Item = f64>, p: f64, h: f64) -> f64 {
    if p == f64::INFINITY {
        values.fold(0.0, f64::max)
    } else {
        (values.map(|v| v.powf(p)).sum::<f64>() * h).powf(1.0 / p)
    }
}

/// Trapezoid-weighted `L^p` over snapshots; exact for constants in time.
fn lp_time(values: &[f64], p: f64, h: f64) -> f64 {
    if p == f64::INFINITY {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let last = values.len() - 1;
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let w = if m == 0 || m == last { 0.5 } else { 1.0 };
            w * v.powf(p)
        })
        .sum();
    (sum * h).powf(1.0 / p)
}

/// Snapshot surrogate of a mixed norm: space integrals are grid sums, time
/// integrals use the trapezoid rule over the (uniform) snapshots, and
/// `L^∞_T` is the maximum over snapshots.
pub fn mixed_norm(traj: &Trajectory, spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    let p_t = spec.time_exponent();
    let h = if p_t == f64::INFINITY {
        if traj.is_empty() {
            return Err(Error::InsufficientSnapshots { needed: 1, got: 0 });
        }
        traj.uniform_spacing().unwrap_or(0.0)
    } else {
        traj.uniform_spacing()?
    };
    let grid = traj.grid().expect("nonempty");
    let dx = grid.dx();
    let moduli: Vec<Vec<f64>> = traj
        .states()
        .iter()
        .map(|u| Ok(spec.derivative.apply(u)?.values().iter().map(|z| z.norm()).collect()))
        .collect::<Result<_>>()?;
    Ok(match spec.order {
        NormOrder::TimeOuter => {
            let inner: Vec<f64> = moduli
                .iter()
                .map(|row| lp_sum(row.iter().copied(), spec.q_inner, dx))
                .collect();
            lp_time(&inner, spec.p_outer, h)
        }
        NormOrder::SpaceOuter => {
            let mut column = vec![0.0; moduli.len()];
            let inner = (0..grid.n()).map(|i| {
                for (c, row) in column.iter_mut().zip(&moduli) {
                    *c = row[i];
                }
                lp_time(&column, spec.q_inner, h)
            });
            lp_sum(inner.collect::<Vec<_>>().into_iter(), spec.p_outer, dx)
        }
    })
}
