//! Information geometric entropy: volumes of the regions a geodesic sweeps,
//! their temporal averages, relative increments, and the asymptotic slope
//! `K_IG` of `S(τ) = log ṽol(τ)`.

mod average;
mod fit;
mod series;
mod volume;

pub use average::{
    averaged_volume, relative_increment, step_averaged_increment, windowed_avg_volume,
};
pub use fit::{estimate_kig, kig_running, ols, FitOptions, IgeSummary, LinearFit, Regime};
pub use series::{ige_series, normalize_complexity, IgeSeries, SeriesOptions};
pub use volume::{instantaneous_volume, volume_over_box};

use crate::geodesic::GeodesicError;
use crate::geometry::GeometryError;
use crate::models::ModelError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IgeError {
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("volume box {rect} is not interior to the domain: {source}")]
    BoxOutsideDomain { rect: String, source: ModelError },
    #[error("volume quadrature over {rect} failed: {source}")]
    Quadrature { rect: String, source: NumericsError },
    #[error("volume quadrature over {rect} did not converge (value {value:e}, error {error:e})")]
    QuadratureNotConverged { rect: String, value: f64, error: f64 },
    #[error("at tau = {tau}: {source}")]
    AtTau { tau: f64, source: Box<IgeError> },
    #[error("series: {0}")]
    InvalidSeries(String),
    #[error("volume entry {index} is {value}; volumes must be finite and non-negative")]
    InvalidVolume { index: usize, value: f64 },
    #[error("tau = {tau} is outside the grid [{lo}, {hi}]")]
    OutsideGrid { tau: f64, lo: f64, hi: f64 },
    #[error("empty averaging window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("increment at window {k} has zero denominator")]
    ZeroDenominator { k: usize },
    #[error("fit window holds {got} points, need at least {needed}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid fit options: {0}")]
    InvalidFit(String),
    #[error("reference volume must be positive and finite, got {0}")]
    InvalidReference(f64),
}

impl IgeError {
    /// The innermost error, looking through [`IgeError::AtTau`].
    pub fn root(&self) -> &IgeError {
        match self {
            IgeError::AtTau { source, .. } => source.root(),
            other => other,
        }
    }
}
