use gdnls::analysis::sample_rng;
use gdnls::model::ModelParams;
use gdnls::{Complex64, FieldState, Grid};

use crate::config::Datum;

impl Datum {
    pub fn build(&self, grid: &Grid, seed: u64) -> gdnls::Result<FieldState> {
        match *self {
            Datum::Zero => Ok(FieldState::zeros(grid, 0.0)),
            Datum::Gaussian {
                amplitude,
                width,
                wavenumber,
                center,
            } => FieldState::from_fn(grid, 0.0, |x| {
                let y = (x - center) / width;
                Complex64::from_polar(amplitude * (-0.5 * y * y).exp(), wavenumber * x)
            }),
            Datum::Sech { amplitude, width } => {
                FieldState::from_fn(grid, 0.0, |x| Complex64::new(amplitude / (x / width).cosh(), 0.0))
            }
            Datum::PlaneWave { amplitude, .. } => {
                let k = self.plane_wavenumber(grid).unwrap_or(0.0);
                FieldState::from_fn(grid, 0.0, |x| Complex64::from_polar(amplitude, k * x))
            }
            Datum::Random { field } => field.sample(grid, &mut sample_rng(seed, 0)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Datum::Zero => true,
            Datum::Gaussian { amplitude, .. } | Datum::Sech { amplitude, .. } | Datum::PlaneWave { amplitude, .. } => {
                amplitude == 0.0
            }
            Datum::Random { .. } => false,
        }
    }

    fn plane_wavenumber(&self, grid: &Grid) -> Option<f64> {
        match *self {
            Datum::PlaneWave { mode, .. } => Some(2.0 * std::f64::consts::PI * mode as f64 / grid.length()),
            _ => None,
        }
    }

    /// Exact solution at time `t` when one is known: plane waves under an
    /// unregularized law, `u0 e^{iωt}` with `ω = −k² − s k A^{2σ} + b A^{4σ}`.
    pub fn exact(&self, grid: &Grid, p: &ModelParams, t: f64) -> Option<gdnls::Result<FieldState>> {
        let Datum::PlaneWave { amplitude, .. } = *self else {
            return None;
        };
        if p.regularization.is_some() {
            return None;
        }
        let k = self.plane_wavenumber(grid)?;
        let a2s = amplitude.abs().powf(2.0 * p.sigma);
        let omega = -k * k - p.convention.sign() * k * a2s + p.b * a2s * a2s;
        Some(FieldState::from_fn(grid, t, |x| Complex64::from_polar(amplitude, k * x + omega * t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gdnls::integrators::{evolve, StepConfig};

    #[test]
    fn plane_wave_orbits_match_the_flow() {
        let g = Grid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let d = Datum::PlaneWave { amplitude: 0.7, mode: 2 };
        for p in [ModelParams::gdnls(1.0), ModelParams::dnlsb(0.8, 0.3)] {
            let traj = evolve(&d.build(&g, 0).unwrap(), &p, 0.5, &StepConfig::new(1e-3)).unwrap();
            let exact = d.exact(&g, &p, 0.5).unwrap().unwrap();
            assert!(traj.last().unwrap().l2_distance(&exact).unwrap() < 1e-10, "{p:?}");
        }
    }
}
