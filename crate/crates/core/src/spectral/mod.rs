//! Periodic pseudo-spectral backbone.

mod field;
mod grid;
pub mod lp;
mod multiplier;
pub mod snapshot;

pub use field::FieldState;
pub use grid::Grid;
pub use lp::{LpBand, LpLadder};
pub use multiplier::{fractional_derivative, fractional_symbol, hilbert_transform, DerivativeKind};

pub(crate) use field::{ensure_finite, l2_distance, l2_norm};
