use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FieldState;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeKind {
    /// `D_x^s = |∂_x|^s`
    Homogeneous,
    /// `⟨D_x⟩^s = (1 + |∂_x|^2)^{s/2}`
    Inhomogeneous,
}

/// Symbol of the order-`s` multiplier at frequency `xi`.
///
/// The homogeneous symbol at `ξ = 0` is `1` for `s = 0` and `0` otherwise;
/// for `s < 0` this projects out the mean rather than producing `Inf`.
pub fn fractional_symbol(xi: f64, s: f64, kind: DerivativeKind) -> f64 {
    match kind {
        DerivativeKind::Homogeneous => {
            if s == 0.0 {
                1.0
            } else if xi == 0.0 {
                0.0
            } else {
                xi.abs().powf(s)
            }
        }
        DerivativeKind::Inhomogeneous => (1.0 + xi * xi).powf(0.5 * s),
    }
}

pub fn fractional_derivative(u: &FieldState, s: f64, kind: DerivativeKind) -> Result<FieldState> {
    u.apply_multiplier(|xi, _| Complex64::new(fractional_symbol(xi, s, kind), 0.0))
}

/// Periodic Hilbert transform, `Ĥu = −i sgn(ξ) û`, with `sgn(0) = 0`.
///
/// The Nyquist slot is also annihilated so real inputs stay real.
pub fn hilbert_transform(u: &FieldState) -> Result<FieldState> {
    let grid = u.grid().clone();
    u.apply_multiplier(|xi, k| {
        let sgn = if grid.is_nyquist(k) || xi == 0.0 {
            0.0
        } else {
            xi.signum()
        };
        Complex64::new(0.0, -sgn)
    })
}
