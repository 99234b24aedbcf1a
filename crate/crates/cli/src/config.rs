use std::path::Path;

use igeflow::geodesic::BoundsMode;
use igeflow::ige::FitOptions;
use igeflow::models::{catalog, StatisticalModel};
use serde::{Deserialize, Serialize};

/// Either a catalog name or `{ "name": ..., "k": ... }` for parametrized
/// families such as `gaussian_product`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Name(String),
    Family {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

impl ModelSpec {
    /// The catalog name this spec resolves to.
    pub fn catalog_name(&self) -> String {
        match self {
            ModelSpec::Name(n) => n.clone(),
            ModelSpec::Family { name, k: Some(k) } => format!("{name}_{k}"),
            ModelSpec::Family { name, k: None } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ode_rel_tol: f64,
    pub quad_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rel_tol: 1e-8,
            quad_rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub window_fraction: f64,
    pub kig_threshold: f64,
    pub r2_min: f64,
    pub slope_drift: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let d = FitOptions::default();
        Self {
            window_fraction: d.window_fraction,
            kig_threshold: d.kig_threshold,
            r2_min: d.r2_min,
            slope_drift: d.slope_drift,
        }
    }
}

impl From<FitConfig> for FitOptions {
    fn from(c: FitConfig) -> Self {
        FitOptions {
            window_fraction: c.window_fraction,
            kig_threshold: c.kig_threshold,
            r2_min: c.r2_min,
            slope_drift: c.slope_drift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsModeConfig {
    #[default]
    Endpoint,
    Envelope,
}

impl From<BoundsModeConfig> for BoundsMode {
    fn from(b: BoundsModeConfig) -> Self {
        match b {
            BoundsModeConfig::Endpoint => BoundsMode::Endpoint,
            BoundsModeConfig::Envelope => BoundsMode::Envelope,
        }
    }
}

impl std::str::FromStr for BoundsModeConfig {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<BoundsMode>()? {
            BoundsMode::Endpoint => Ok(BoundsModeConfig::Endpoint),
            BoundsMode::Envelope => Ok(BoundsModeConfig::Envelope),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub reference_volume: f64,
}

fn default_grid_points() -> usize {
    200
}

fn default_true() -> bool {
    true
}

fn default_output() -> String {
    "experiment".into()
}

/// One experiment: a model, an initial condition for the geodesic, and the
/// knobs of the entropy pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub theta0: Vec<f64>,
    pub theta_dot0: Vec<f64>,
    pub tau_max: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub tau_burn: f64,
    #[serde(default)]
    pub bounds_mode: BoundsModeConfig,
    #[serde(default)]
    pub normalization: Option<Normalization>,
    /// Rescale the initial velocity to unit speed.
    #[serde(default = "default_true")]
    pub normalize_speed: bool,
    /// Path stem for `<stem>.csv` and `<stem>.summary.json`.
    #[serde(default = "default_output")]
    pub output: String,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tau_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub bounds_mode: Option<BoundsModeConfig>,
    pub tau_burn: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.tau_max {
            self.tau_max = v;
        }
        if let Some(v) = o.grid_points {
            self.grid_points = v;
        }
        if let Some(v) = o.bounds_mode {
            self.bounds_mode = v;
        }
        if let Some(v) = o.tau_burn {
            self.tau_burn = v;
        }
    }

    /// Check every field and resolve the model. All problems are reported,
    /// one message per field.
    pub fn validate(&self) -> Result<StatisticalModel, ConfigError> {
        let mut errs = Vec::new();
        let model = match catalog(&self.model.catalog_name()) {
            Ok(m) => Some(m),
            Err(e) => {
                errs.push(format!("model: {e}"));
                None
            }
        };
        if let Some(m) = &model {
            let n = m.dim();
            if self.theta0.len() != n {
                errs.push(format!("theta0: expected {n}, got {}", self.theta0.len()));
            } else if let Err(e) = m.domain().check(&self.theta0) {
                errs.push(format!("theta0: {e}"));
            }
            if self.theta_dot0.len() != n {
                errs.push(format!("theta_dot0: expected {n}, got {}", self.theta_dot0.len()));
            }
        }
        if !self.theta_dot0.iter().all(|v| v.is_finite()) || self.theta_dot0.iter().all(|&v| v == 0.0) {
            errs.push("theta_dot0: must be finite and nonzero".into());
        }
        if !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            errs.push(format!("tau_max: must be positive, got {}", self.tau_max));
        }
        if self.grid_points < 10 {
            errs.push(format!("grid_points: must be at least 10, got {}", self.grid_points));
        }
        for (name, v) in [
            ("tolerances.ode_rel_tol", self.tolerances.ode_rel_tol),
            ("tolerances.quad_rel_tol", self.tolerances.quad_rel_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                errs.push(format!("{name}: must be in (0, 1), got {v}"));
            }
        }
        let f = &self.fit;
        if !(f.window_fraction > 0.0 && f.window_fraction <= 1.0) {
            errs.push(format!("fit.window_fraction: must be in (0, 1], got {}", f.window_fraction));
        }
        if !f.kig_threshold.is_finite() {
            errs.push("fit.kig_threshold: must be finite".into());
        }
        if !(0.0..=1.0).contains(&f.r2_min) {
            errs.push(format!("fit.r2_min: must be in [0, 1], got {}", f.r2_min));
        }
        if !(f.slope_drift >= 0.0) {
            errs.push(format!("fit.slope_drift: must be ≥ 0, got {}", f.slope_drift));
        }
        if !(self.tau_burn >= 0.0) || !(self.tau_burn < self.tau_max) {
            errs.push(format!("tau_burn: must be in [0, tau_max), got {}", self.tau_burn));
        }
        if let Some(n) = &self.normalization {
            if !(n.reference_volume > 0.0) || !n.reference_volume.is_finite() {
                errs.push(format!(
                    "normalization.reference_volume: must be positive, got {}",
                    n.reference_volume
                ));
            }
        }
        if self.output.trim().is_empty() {
            errs.push("output: must not be empty".into());
        }
        match model {
            Some(m) if errs.is_empty() => Ok(m),
            _ => Err(ConfigError::Invalid(errs)),
        }
    }

    /// Uniform grid over `(tau_burn, tau_max]`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let span = self.tau_max - self.tau_burn;
        (1..=n)
            .map(|i| {
                if i == n {
                    self.tau_max
                } else {
                    self.tau_burn + span * i as f64 / n as f64
                }
            })
            .collect()
    }
}
