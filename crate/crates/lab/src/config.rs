//! Experiment configuration.
//!
//! A config is a TOML document with the sections `[grid]`, `[model]`, `[step]`
//! and `[experiment]` (plus `[sweep]` for parameter sweeps). Unknown keys are
//! rejected so that typos surface as errors instead of silently falling back
//! to defaults. Every tolerance lives in `[experiment.tolerances]`.

use std::collections::BTreeMap;
use std::path::Path;

use gdnls::analysis::{NormSelector, RandomField};
use gdnls::integrators::StepConfig;
use gdnls::model::{Convention, ModelParams, Regularization};
use gdnls::Grid;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub step: StepSection,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Number of grid points (power of two recommended).
    pub n: usize,
    /// Period `L`; the grid covers `[−L/2, L/2)`.
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub sigma: f64,
    /// −1 for gDNLS, +1 for DNLSb.
    pub sign: i32,
    pub b: f64,
    pub regularization: Option<Regularization>,
    pub unsafe_sigma: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            sigma: 1.0,
            sign: -1,
            b: 0.0,
            regularization: None,
            unsafe_sigma: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSection {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub dealias: bool,
}

impl Default for StepSection {
    fn default() -> Self {
        StepSection {
            dt: 1e-3,
            t_final: 1.0,
            record_every: 1,
            dealias: true,
        }
    }
}

/// Initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Datum {
    Zero,
    /// `A e^{−(x−x0)²/(2w²)} e^{ikx}`
    Gaussian {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        wavenumber: f64,
        #[serde(default)]
        center: f64,
    },
    /// `A sech(x/w)`
    Sech {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `A e^{2πi·mode·x/L}`
    PlaneWave {
        #[serde(default = "one")]
        amplitude: f64,
        mode: i64,
    },
    /// A random field drawn with the experiment seed.
    Random { field: RandomField },
}

fn one() -> f64 {
    1.0
}

impl Default for Datum {
    fn default() -> Self {
        Datum::Gaussian {
            amplitude: 1.0,
            width: 1.0,
            wavenumber: 0.0,
            center: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub datum: Datum,
    pub seed: u64,
    /// Soliton frequency and speed.
    pub omega: f64,
    pub c: f64,
    /// Coarsest step of the dt-halving ladder (defaults to `step.dt`).
    pub order_dt: Option<f64>,
    /// Number of ladder levels; each level halves the step.
    pub order_levels: usize,
    /// Grid sizes for the soliton residual study (same period).
    pub residual_n: Vec<usize>,
    /// Littlewood-Paley indices of the truncations `P_{<k}`.
    pub k_values: Vec<u32>,
    pub n_iter: usize,
    pub lambdas: Vec<f64>,
    /// Snapshot spacings, in steps, for the gauge residual.
    pub record_spacings: Vec<usize>,
    /// Block of the partial gauge (default: `min(6, j_max)`).
    pub partial_j: Option<u32>,
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub fields: Vec<RandomField>,
    pub delta: f64,
    pub envelope_norm: NormSelector,
    /// Block and half-width of the modulation split.
    pub j: u32,
    pub width: u32,
    /// Modulation window `[−window, window]`.
    pub window: f64,
    /// Exponent `p` on the mass in the energy lower bound.
    pub exponent: Option<f64>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datum: Datum::default(),
            seed: 0,
            omega: 1.0,
            c: 1.0,
            order_dt: None,
            order_levels: 3,
            residual_n: Vec::new(),
            k_values: vec![3, 4, 5, 6],
            n_iter: 6,
            lambdas: vec![0.5, 2.0],
            record_spacings: vec![40, 20, 10, 5],
            partial_j: None,
            epsilons: vec![1e-2, 1e-3, 1e-4],
            samples: 100,
            fields: vec![
                RandomField::White,
                RandomField::Smooth { scale: 5.0 },
                RandomField::Smooth { scale: 40.0 },
            ],
            delta: 0.1,
            envelope_norm: NormSelector::L2,
            j: 5,
            width: 4,
            window: 2.0,
            exponent: None,
            tolerances: Tolerances::default(),
        }
    }
}

/// Pass/fail thresholds. Defaults are the acceptance values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative L² error of the exact plane-wave orbit.
    pub exact_error: f64,
    /// Absolute L² error against the exact soliton.
    pub solution_error: f64,
    /// Expected error ratio when dt halves, and its allowed band.
    pub order_ratio: f64,
    pub order_band: f64,
    /// Errors and residuals below this are roundoff; no ratio is formed.
    pub error_floor: f64,
    /// Drifts below this are roundoff; no ratio is formed.
    pub drift_floor: f64,
    pub residual: f64,
    pub orbit_drift: f64,
    pub scaling_factor: f64,
    pub picard_ratio: f64,
    pub picard_tail: f64,
    pub regularization_ratio: f64,
    pub lipschitz_spread: f64,
    pub partition: f64,
    pub gauge_residual: f64,
    /// Minimum observed order of the gauge residual in the snapshot spacing.
    pub gauge_order: f64,
    pub modulus_ulps: f64,
    pub modulation_low: f64,
    pub fraction_sum: f64,
    pub energy_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact_error: 1e-8,
            solution_error: 1e-4,
            order_ratio: 16.0,
            order_band: 4.0,
            error_floor: 1e-10,
            drift_floor: 1e-13,
            residual: 1e-6,
            orbit_drift: 1e-12,
            scaling_factor: 10.0,
            picard_ratio: 0.5,
            picard_tail: 10.0,
            regularization_ratio: 0.7,
            lipschitz_spread: 2.0,
            partition: 1e-12,
            gauge_residual: 1e-4,
            gauge_order: 2.0,
            modulus_ulps: 4.0,
            modulation_low: 0.9,
            fraction_sum: 1e-12,
            energy_margin: 2.0,
        }
    }
}

impl Tolerances {
    pub fn order_range(&self) -> (f64, f64) {
        (self.order_ratio - self.order_band, self.order_ratio + self.order_band)
    }
}

/// Cartesian-product sweep over dotted config keys, e.g.
/// `parameters = { "model.sigma" = [0.6, 0.9] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: String,
    pub parameters: BTreeMap<String, Vec<toml::Value>>,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent: usize,
}

fn default_max_concurrent() -> usize {
    8
}

impl Config {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> LabResult<()> {
        let field = |name: &str, msg: String| Err(LabError::Config(format!("{name}: {msg}")));
        if let Err(e) = self.grid() {
            return field("grid", e.to_string());
        }
        if let Err(e) = self.params().and_then(|p| p.validate().map(|_| p)) {
            return field("model", e.to_string());
        }
        let s = &self.step;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return field("step.dt", format!("must be positive, got {}", s.dt));
        }
        if !(s.t_final.is_finite() && s.t_final >= 0.0) {
            return field("step.t_final", format!("must be non-negative, got {}", s.t_final));
        }
        if s.record_every == 0 {
            return field("step.record_every", "must be at least 1".into());
        }
        let e = &self.experiment;
        if e.order_levels < 2 {
            return field("experiment.order_levels", "need at least 2 levels".into());
        }
        if let Some(dt) = e.order_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return field("experiment.order_dt", format!("must be positive, got {dt}"));
            }
        }
        if e.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return field("experiment.lambdas", "must be positive".into());
        }
        if e.epsilons.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return field("experiment.epsilons", "must be positive".into());
        }
        if e.record_spacings.contains(&0) {
            return field("experiment.record_spacings", "must be at least 1".into());
        }
        if e.fields.is_empty() {
            return field("experiment.fields", "need at least one field kind".into());
        }
        if !(e.delta > 0.0) {
            return field("experiment.delta", format!("must be positive, got {}", e.delta));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.max_concurrent == 0 {
                return field("sweep.max_concurrent", "must be at least 1".into());
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> gdnls::Result<Grid> {
        Grid::new(self.grid.n, self.grid.length)
    }

    pub fn params(&self) -> gdnls::Result<ModelParams> {
        let m = &self.model;
        Ok(ModelParams {
            sigma: m.sigma,
            b: m.b,
            convention: Convention::from_sign(m.sign)?,
            regularization: m.regularization,
            unsafe_sigma: m.unsafe_sigma,
        })
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig::new(self.step.dt)
            .record_every(self.step.record_every)
            .dealias(self.step.dealias)
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.experiment.tolerances
    }
}
