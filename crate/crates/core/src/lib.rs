//! Pseudo-spectral laboratory for the generalized derivative nonlinear
//! Schrödinger equation
//!
//! ```text
//!     i u_t + u_xx = i |u|^{2σ} u_x
//! ```
//!
//! and its extension with the scale-invariant power term
//! `i u_t + u_xx + i|u|^{2σ} u_x + b|u|^{4σ} u = 0`, on a periodic grid.
//!
//! * [`spectral`]: grids, Fourier multipliers, Littlewood-Paley projections.
//! * [`model`]: nonlinearities, conserved quantities, scaling.
//! * [`solitons`]: the explicit traveling-wave family.
//! * [`integrators`]: integrating-factor RK4 and the Picard construction.
//! * [`gauge`]: full and frequency-localized gauge transforms.
//! * [`analysis`]: Sobolev/mixed norms, frequency envelopes, modulation.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod gauge;
pub mod integrators;
pub mod model;
pub mod quadrature;
pub mod solitons;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_complex::Complex64;
pub use spectral::{FieldState, Grid, LpBand, LpLadder};
