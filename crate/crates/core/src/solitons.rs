//! Explicit traveling waves `u(t,x) = e^{iωt} Φ(x−ct) e^{iθ(x−ct)}` of
//!
//! ```text
//!     i u_t + u_xx + i|u|^{2σ} u_x + b|u|^{4σ} u = 0
//! ```
//!
//! with `γ = 1 + (2σ+2)² b / (2σ+1)` and `Φ^{2σ}` given by a cosh profile
//! (positive or non-positive `γ`) or, at `c = 2√ω`, an algebraic profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature;
use crate::spectral::{FieldState, Grid};

/// Decay required at the domain boundary for exponentially localized profiles.
pub const BOUNDARY_DECAY: f64 = 1e-10;

const PHASE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    GenericPositiveGamma,
    Algebraic,
    NegativeGamma,
}

/// `γ = 1 + (2σ+2)² b / (2σ+1)`.
pub fn gamma_of(sigma: f64, b: f64) -> f64 {
    let w = 2.0 * sigma + 2.0;
    1.0 + w * w * b / (2.0 * sigma + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolitonSpec {
    sigma: f64,
    b: f64,
    omega: f64,
    c: f64,
    gamma: f64,
    branch: Branch,
}

impl SolitonSpec {
    /// Classify `(σ, b, ω, c)`; the algebraic branch is selected when
    /// `c = 2√ω` to within 1e-12 relative.
    pub fn new(sigma: f64, b: f64, omega: f64, c: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("b", b), ("omega", omega), ("c", c)] {
            if !v.is_finite() {
                return Err(Error::Branch(format!("{name} is not finite")));
            }
        }
        if sigma <= 0.0 {
            return Err(Error::Branch(format!("σ > 0 violated (σ = {sigma})")));
        }
        if omega <= 0.0 {
            return Err(Error::Branch(format!("ω > 0 violated (ω = {omega})")));
        }
        let gamma = gamma_of(sigma, b);
        let edge = 2.0 * omega.sqrt();
        let at_edge = (c - edge).abs() <= 1e-12 * edge;
        let branch = if gamma > 0.0 {
            if at_edge {
                Branch::Algebraic
            } else if -edge < c && c < edge {
                Branch::GenericPositiveGamma
            } else {
                return Err(Error::Branch(format!(
                    "γ = {gamma} > 0 needs −2√ω < c < 2√ω or c = 2√ω (c = {c}, 2√ω = {edge})"
                )));
            }
        } else {
            let upper = -2.0 * (-gamma / (1.0 - gamma)).sqrt() * omega.sqrt();
            if !(-edge < c && c < upper) {
                return Err(Error::Branch(format!(
                    "γ = {gamma} ≤ 0 needs −2√ω < c < −2√(−γ/(1−γ))√ω = {upper} (c = {c})"
                )));
            }
            Branch::NegativeGamma
        };
        let spec = SolitonSpec {
            sigma,
            b,
            omega,
            c: if branch == Branch::Algebraic { edge } else { c },
            gamma,
            branch,
        };
        if branch != Branch::Algebraic {
            let disc = spec.discriminant();
            if disc <= 0.0 {
                return Err(Error::Branch(format!(
                    "c² + γ(4ω − c²) > 0 violated (value {disc})"
                )));
            }
        }
        Ok(spec)
    }

    /// The `c = 2√ω` endpoint soliton.
    pub fn algebraic(sigma: f64, b: f64, omega: f64) -> Result<Self> {
        Self::new(sigma, b, omega, 2.0 * omega.sqrt())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Model parameters under which this soliton is exact.
    pub fn model(&self) -> ModelParams {
        ModelParams {
            unsafe_sigma: self.sigma <= 0.5,
            ..ModelParams::dnlsb(self.sigma, self.b)
        }
    }

    /// Algebraic solitons decay only polynomially and are not well captured on a torus.
    pub fn is_qualitative_only(&self) -> bool {
        self.branch == Branch::Algebraic
    }

    fn discriminant(&self) -> f64 {
        let c2 = self.c * self.c;
        c2 + self.gamma * (4.0 * self.omega - c2)
    }

    /// Exponential rate `σ√(4ω − c²)` of the cosh profile.
    fn rate(&self) -> f64 {
        self.sigma * (4.0 * self.omega - self.c * self.c).sqrt()
    }

    /// `Φ(x)^{2σ}`.
    pub fn profile_power(&self, x: f64) -> f64 {
        let s = self.sigma;
        match self.branch {
            Branch::Algebraic => {
                let q = s * self.c * x;
                2.0 * (s + 1.0) * self.c / (q * q + self.gamma)
            }
            Branch::GenericPositiveGamma | Branch::NegativeGamma => {
                let d = 4.0 * self.omega - self.c * self.c;
                let denom = self.discriminant().sqrt() * (self.rate() * x).cosh() - self.c;
                debug_assert!(denom > 0.0);
                (s + 1.0) * d / denom
            }
        }
    }

    /// `Φ(x) ≥ 0`.
    pub fn amplitude_profile(&self, x: f64) -> f64 {
        self.profile_power(x).powf(0.5 / self.sigma)
    }

    /// Length scale beyond which the profile is in its far tail.
    fn tail_start(&self) -> f64 {
        match self.branch {
            Branch::Algebraic => 20.0 / (self.sigma * self.c),
            _ => 40.0 / self.rate(),
        }
    }

    /// `∫_{-∞}^x Φ^{2σ}`.
    pub fn tail_integral(&self, x: f64) -> Result<f64> {
        let f = |y: f64| self.profile_power(y);
        let cut = -self.tail_start();
        if x <= cut {
            return quadrature::integrate_to_neg_infinity(f, x, PHASE_TOL);
        }
        let far = quadrature::integrate_to_neg_infinity(f, cut, PHASE_TOL)?;
        Ok(far + self.integrate_between(cut, x)?)
    }

    fn integrate_between(&self, a: f64, b: f64) -> Result<f64> {
        // panel width tied to the profile scale keeps the adaptive rule honest
        let scale = match self.branch {
            Branch::Algebraic => 1.0 / (self.sigma * self.c),
            _ => 1.0 / self.rate(),
        };
        let panels = ((b - a) / scale).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * h;
            total += quadrature::integrate(|y| self.profile_power(y), lo, lo + h, PHASE_TOL)?;
        }
        Ok(total)
    }

    /// `θ(x) = (c/2) x − (1/(2σ+2)) ∫_{-∞}^x Φ^{2σ}`.
    pub fn phase_profile(&self, x: f64) -> Result<f64> {
        Ok(0.5 * self.c * x - self.tail_integral(x)? / (2.0 * self.sigma + 2.0))
    }

    /// `θ` at many ascending points by accumulating panel integrals.
    pub fn phase_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(xs.len());
        let Some(&first) = xs.first() else {
            return Ok(out);
        };
        let mut acc = self.tail_integral(first)?;
        let mut prev = first;
        for &x in xs {
            if x < prev {
                return Err(Error::InvalidParams("phase_at needs ascending points".into()));
            }
            if x > prev {
                acc += quadrature::integrate(|y| self.profile_power(y), prev, x, PHASE_TOL)?;
            }
            prev = x;
            out.push(0.5 * self.c * x - acc / (2.0 * self.sigma + 2.0));
        }
        Ok(out)
    }

    /// `φ(y) = Φ(y) e^{iθ(y)}` at ascending points.
    pub fn profile_at(&self, ys: &[f64]) -> Result<Vec<Complex64>> {
        let theta = self.phase_at(ys)?;
        Ok(ys
            .iter()
            .zip(theta)
            .map(|(&y, th)| Complex64::from_polar(self.amplitude_profile(y), th))
            .collect())
    }
}

/// Sample `u(t, ·)` of the traveling wave on `grid`.
///
/// Exponentially localized profiles must have decayed below
/// [`BOUNDARY_DECAY`] at both ends of the window around the center `ct`.
pub fn soliton_field(spec: &SolitonSpec, t: f64, grid: &Grid) -> Result<FieldState> {
    let shift = spec.c * t;
    let half = 0.5 * grid.length();
    if spec.branch != Branch::Algebraic {
        let edge = spec
            .amplitude_profile(-half - shift)
            .max(spec.amplitude_profile(half - shift));
        if edge >= BOUNDARY_DECAY {
            return Err(Error::InsufficientDecay {
                amplitude: edge,
                limit: BOUNDARY_DECAY,
            });
        }
    }
    let ys: Vec<f64> = grid.points().map(|x| x - shift).collect();
    let phase = Complex64::from_polar(1.0, spec.omega * t);
    let values = spec.profile_at(&ys)?.into_iter().map(|z| phase * z).collect();
    FieldState::new(grid, values, t)
}

/// L² norm of `i u_t + u_xx + i|u|^{2σ}u_x + b|u|^{4σ}u` at `t = 0`, with
/// `u_t = iωu − c u_x` taken from the ansatz and space derivatives spectral.
pub fn dnlsb_residual(spec: &SolitonSpec, grid: &Grid) -> Result<f64> {
    let u = soliton_field(spec, 0.0, grid)?;
    let mut spec1 = u.spectrum();
    let mut spec2 = spec1.clone();
    grid.differentiate_spectrum(&mut spec1, 1);
    grid.differentiate_spectrum(&mut spec2, 2);
    let ux = grid.inverse(&spec1);
    let uxx = grid.inverse(&spec2);
    let i = Complex64::i();
    let s = spec.sigma;
    let residual: Vec<Complex64> = u
        .values()
        .iter()
        .zip(ux.iter().zip(&uxx))
        .map(|(&z, (&d1, &d2))| {
            let ut = i * spec.omega * z - spec.c * d1;
            let a = z.norm_sqr().powf(s);
            i * ut + d2 + i * a * d1 + spec.b * a * a * z
        })
        .collect();
    Ok(crate::spectral::l2_norm(&residual, grid.dx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of(1.0, 0.0), 1.0);
        assert_eq!(gamma_of(1.0, -3.0 / 16.0), 0.0);
        assert!((gamma_of(0.75, 1.0) - 5.9).abs() < 1e-14);
    }

    #[test]
    fn dnls_profile_is_four_sech() {
        let s = SolitonSpec::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(s.branch(), Branch::GenericPositiveGamma);
        for x in [-3.0f64, -0.4, 0.0, 0.9, 5.0] {
            let expect = 4.0 / (2.0f64 * x).cosh();
            assert!((s.profile_power(x) - expect).abs() < 1e-14 * expect.max(1.0));
        }
        assert!((s.amplitude_profile(0.0) - 2.0).abs() < 1e-15);
        assert!(s.amplitude_profile(60.0) < 1e-20);
    }

    #[test]
    fn algebraic_profile() {
        let s = SolitonSpec::algebraic(1.0, 0.0, 1.0).unwrap();
        assert_eq!(s.branch(), Branch::Algebraic);
        assert!(s.is_qualitative_only());
        for x in [-2.0, 0.0, 0.5, 10.0] {
            assert!((s.profile_power(x) - 8.0 / (4.0 * x * x + 1.0)).abs() < 1e-14);
        }
        assert!((s.amplitude_profile(0.0) - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn phase_limits_for_dnls() {
        // ∫ 4 sech(2x) dx = 2π, so θ(+∞) = −2π/4
        let s = SolitonSpec::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(s.phase_profile(-80.0).unwrap().abs() < 1e-14);
        assert!((s.phase_profile(80.0).unwrap() + PI / 2.0).abs() < 1e-12);
        let xs: Vec<f64> = (0..200).map(|i| -10.0 + 0.1 * i as f64).collect();
        let th = s.phase_at(&xs).unwrap();
        assert!(th.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn branch_gates() {
        // ω → c²/4 from above leaves no valid branch once c passes 2√ω
        assert!(SolitonSpec::new(1.0, 0.0, 1.0, 2.1).is_err());
        assert!(SolitonSpec::new(1.0, 0.0, 1.0, -2.0).is_err());
        assert!(SolitonSpec::new(1.0, 0.0, 0.0, 0.0).is_err());
        // γ = 0 needs c < 0
        let err = SolitonSpec::new(1.0, -3.0 / 16.0, 1.0, 0.5).unwrap_err();
        assert!(err.to_string().contains("γ"), "{err}");
        let neg = SolitonSpec::new(1.0, -3.0 / 16.0, 1.0, -0.5).unwrap();
        assert_eq!(neg.branch(), Branch::NegativeGamma);
        // γ < 0: c must lie below −2√(−γ/(1−γ))√ω
        let b = -0.25;
        let g = gamma_of(1.0, b);
        let upper = -2.0 * (-g / (1.0 - g)).sqrt();
        assert!(SolitonSpec::new(1.0, b, 1.0, upper + 0.01).is_err());
        assert!(SolitonSpec::new(1.0, b, 1.0, upper - 0.01).is_ok());
        assert!(SolitonSpec::algebraic(1.0, b, 1.0).is_err());
    }

    #[test]
    fn profile_approaches_algebraic_limit() {
        let alg = SolitonSpec::algebraic(0.8, 0.1, 1.0).unwrap();
        for x in [0.0, 0.7, 3.0] {
            let mut prev = f64::INFINITY;
            for m in 2..=5 {
                let c = 2.0 * (1.0 - 10f64.powi(-m));
                let gen = SolitonSpec::new(0.8, 0.1, 1.0, c).unwrap();
                let gap = (gen.amplitude_profile(x) - alg.amplitude_profile(x)).abs();
                assert!(gap < prev, "x = {x}, m = {m}");
                prev = gap;
            }
            assert!(prev < 1e-3);
        }
    }

    #[test]
    fn boundary_decay_enforced() {
        let s = SolitonSpec::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            soliton_field(&s, 0.0, &Grid::new(256, 10.0).unwrap()),
            Err(Error::InsufficientDecay { .. })
        ));
        assert!(soliton_field(&s, 0.0, &Grid::new(1024, 80.0).unwrap()).is_ok());
    }
}
