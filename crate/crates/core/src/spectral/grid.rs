use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    n: usize,
    length: f64,
    frequencies: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[-L/2, L/2)` together with its FFT dual ladder.
///
/// Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let frequencies = (0..n)
            .map(|m| 2.0 * PI * wavenumber(m, n) as f64 / length)
            .collect();
        Ok(Grid {
            inner: Arc::new(GridInner {
                n,
                length,
                frequencies,
                forward,
                inverse,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn point(&self, m: usize) -> f64 {
        -0.5 * self.inner.length + m as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(move |m| self.point(m))
    }

    /// Angular frequencies `ξ_m = 2π k_m / L` in FFT order.
    pub fn frequencies(&self) -> &[f64] {
        &self.inner.frequencies
    }

    /// Integer wavenumber of FFT slot `m` (`-n/2` sits at `m = n/2`).
    pub fn wavenumber(&self, m: usize) -> i64 {
        wavenumber(m, self.n())
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n() / 2
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.n() as f64 / self.length()
    }

    /// Unnormalized forward DFT.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n());
        self.inner.forward.process(buf);
    }

    /// Inverse DFT including the `1/n` factor, so `inverse(forward(u)) == u`.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n());
        self.inner.inverse.process(buf);
        let scale = 1.0 / self.n() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Spectral `d/dx` of physical samples (Nyquist mode dropped).
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.forward(values);
        self.differentiate_spectrum(&mut buf, 1);
        self.inverse_in_place(&mut buf);
        buf
    }

    /// Multiply a spectrum by `(iξ)^order`; odd orders drop the Nyquist mode.
    pub fn differentiate_spectrum(&self, spectrum: &mut [Complex64], order: u32) {
        let i = Complex64::i();
        for (m, (z, &xi)) in spectrum.iter_mut().zip(self.frequencies()).enumerate() {
            if order % 2 == 1 && self.is_nyquist(m) {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z *= (i * xi).powu(order);
            }
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.length().to_bits() == other.length().to_bits()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n())
            .field("length", &self.length())
            .finish()
    }
}

fn wavenumber(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pi_grid_has_integer_frequencies() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let ks: Vec<i64> = g.frequencies().iter().map(|&xi| xi.round() as i64).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, 5, 6, 7, -8, -7, -6, -5, -4, -3, -2, -1]);
        for (&xi, &k) in g.frequencies().iter().zip(&ks) {
            assert!((xi - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn spacing_from_length() {
        let g = Grid::new(1024, 80.0).unwrap();
        assert_eq!(g.dx(), 0.078125);
        assert_eq!(g.point(0), -40.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(15, 10.0).is_err());
        assert!(Grid::new(8, 10.0).is_err());
        assert!(Grid::new(48, 10.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -1.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn round_trip() {
        let g = Grid::new(256, 17.0).unwrap();
        let u: Vec<Complex64> = g
            .points()
            .map(|x| Complex64::new((x * 0.3).sin() + x * x * 0.01, (-x * x).exp()))
            .collect();
        let back = g.inverse(&g.forward(&u));
        let num: f64 = u.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = u.iter().map(|a| a.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-14);
    }
}
