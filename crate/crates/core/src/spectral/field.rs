use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// One complex snapshot `u(t, x_m)` on a [`Grid`].
#[derive(Clone, Debug)]
pub struct FieldState {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl FieldState {
    pub fn new(grid: &Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if !time.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        ensure_finite(&values, "field values")?;
        Ok(FieldState {
            grid: grid.clone(),
            values,
            time,
        })
    }

    pub fn zeros(grid: &Grid, time: f64) -> Self {
        FieldState {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
            time,
        }
    }

    /// Sample `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn from_real(grid: &Grid, time: f64, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            time,
        )
    }

    pub fn from_spectrum(grid: &Grid, spectrum: Vec<Complex64>, time: f64) -> Result<Self> {
        let mut buf = spectrum;
        if buf.len() != grid.n() {
            return Err(Error::InvalidGrid("spectrum length mismatch".into()));
        }
        grid.inverse_in_place(&mut buf);
        Self::new(grid, buf, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    /// Apply a Fourier multiplier `m(ξ_k, k)` (slot index passed for Nyquist handling).
    pub fn apply_multiplier(&self, m: impl Fn(f64, usize) -> Complex64) -> Result<Self> {
        let mut spec = self.spectrum();
        for (k, (z, &xi)) in spec.iter_mut().zip(self.grid.frequencies()).enumerate() {
            *z *= m(xi, k);
        }
        Self::from_spectrum(&self.grid, spec, self.time)
    }

    /// Apply a real multiplier given per FFT slot.
    pub fn apply_real_multiplier(&self, m: &[f64]) -> Result<Self> {
        debug_assert_eq!(m.len(), self.grid.n());
        self.apply_multiplier(|_, k| Complex64::new(m[k], 0.0))
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self
            .grid
            .points()
            .zip(&self.values)
            .map(|(x, &z)| f(x, z))
            .collect();
        Self::new(&self.grid, values, self.time)
    }

    pub fn scale(&self, c: Complex64) -> Result<Self> {
        self.map(|_, z| c * z)
    }

    pub fn derivative(&self) -> Result<Self> {
        Self::new(&self.grid, self.grid.derivative(&self.values), self.time)
    }

    pub fn check_same_grid(&self, other: &FieldState) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &FieldState) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FieldState) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &FieldState, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(&self.grid, values, self.time)
    }

    /// `‖u‖_{L²}` by the uniform-grid rule.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.dx())
    }

    pub fn linf_norm(&self) -> f64 {
        linf_norm(&self.values)
    }

    /// L² distance to another snapshot on the same grid.
    pub fn l2_distance(&self, other: &FieldState) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(l2_distance(&self.values, &other.values, self.grid.dx()))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.linf_norm().max(f64::MIN_POSITIVE);
        self.values.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// Circular shift of the samples by `shift` slots.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut values = self.values.clone();
        values.rotate_right(shift % self.grid.n());
        FieldState {
            grid: self.grid.clone(),
            values,
            time: self.time,
        }
    }
}

pub(crate) fn ensure_finite(values: &[Complex64], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn l2_norm(values: &[Complex64], dx: f64) -> f64 {
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

pub(crate) fn l2_distance(a: &[Complex64], b: &[Complex64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>() * dx).sqrt()
}

pub(crate) fn linf_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
