//! Parametric families `p(X|Θ)`: log-densities, parameter domains, relative
//! entropy, and Fisher–Rao metrics.

mod catalog;
mod fisher;
mod reparam;
mod sample;

use std::fmt;
use std::ops::{Deref, Range};
use std::sync::Arc;

use crate::numerics::{Interval, MetricMatrix, NumericsError};

pub use catalog::{catalog, catalog_entries, CatalogEntry, CATALOG_NAMES};
pub use fisher::{
    fisher_metric, fisher_metric_numeric, fisher_metric_quadrature, relative_entropy,
    total_probability, DEFAULT_METRIC_STEP,
};
pub use reparam::{reparametrize, Reparametrization};

/// Relative clearance from finite domain ends for a point to count as interior.
pub const INTERIOR_MARGIN: f64 = 1e-9;

pub type LogDensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type MetricFn = Arc<dyn Fn(&[f64]) -> MetricMatrix + Send + Sync>;
/// Returns `[∂_0 g, ∂_1 g, …]`.
pub type MetricDerivativeFn = Arc<dyn Fn(&[f64]) -> Vec<MetricMatrix> + Send + Sync>;
/// Per sample-space axis `(location, scale)` of the distribution at `Θ`,
/// used to map unbounded sample spaces onto finite boxes.
pub type SampleScaleFn = Arc<dyn Fn(&[f64]) -> Vec<(f64, f64)> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model `{name}`; available: {available}")]
    UnknownModel { name: String, available: String },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {axis} = {value} lies outside the domain {domain}")]
    OutsideDomain {
        axis: usize,
        value: f64,
        domain: String,
    },
    #[error("coordinate {axis} = {value} is within {clearance:e} of the domain boundary")]
    TooCloseToBoundary {
        axis: usize,
        value: f64,
        clearance: f64,
    },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("{what}: {source}")]
    Numerics {
        what: &'static str,
        #[source]
        source: NumericsError,
    },
    #[error("{what}: quadrature did not converge (estimate {value:e} ± {error:e})")]
    QuadratureNotConverged {
        what: &'static str,
        value: f64,
        error: f64,
    },
    #[error("numeric metric is not positive definite ({detail}); the difference step is likely mis-sized")]
    IndefiniteMetric { detail: String },
    #[error("invalid reparametrization: {0}")]
    Reparametrization(String),
}

/// Coordinates `Θ = (θ¹, …, θⁿ)` of a distribution on the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(axis) = coords.iter().position(|c| !c.is_finite()) {
            return Err(ModelError::OutsideDomain {
                axis,
                value: coords[axis],
                domain: "finite reals".into(),
            });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Product of per-coordinate ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDomain {
    axes: Vec<Interval>,
}

impl ParameterDomain {
    pub fn new(axes: Vec<Interval>) -> Self {
        assert!(!axes.is_empty(), "domain needs at least one axis");
        Self { axes }
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        self.check(theta).is_ok()
    }

    /// Interior check with the standard margin.
    pub fn check(&self, theta: &[f64]) -> Result<(), ModelError> {
        self.check_len(theta)?;
        for (axis, (iv, &v)) in self.axes.iter().zip(theta).enumerate() {
            if !iv.contains_with_margin(v, INTERIOR_MARGIN) {
                return Err(ModelError::OutsideDomain {
                    axis,
                    value: v,
                    domain: self.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Interior check that additionally requires `θ^k ± reach[k]` to stay inside.
    pub fn check_reach(&self, theta: &[f64], reach: &[f64]) -> Result<(), ModelError> {
        self.check(theta)?;
        for (axis, iv) in self.axes.iter().enumerate() {
            let (v, r) = (theta[axis], reach[axis]);
            if !iv.contains_with_margin(v - r, INTERIOR_MARGIN)
                || !iv.contains_with_margin(v + r, INTERIOR_MARGIN)
            {
                return Err(ModelError::TooCloseToBoundary {
                    axis,
                    value: v,
                    clearance: r,
                });
            }
        }
        Ok(())
    }

    fn check_len(&self, theta: &[f64]) -> Result<(), ModelError> {
        if theta.len() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ParameterDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.axes.iter().map(Interval::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Where the microstates `X` live.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpace {
    /// Product of (possibly unbounded) intervals; `X` is a real vector.
    Continuous(Vec<Interval>),
    /// A finite list of outcomes.
    Finite(Vec<Vec<f64>>),
}

impl SampleSpace {
    pub fn dim(&self) -> usize {
        match self {
            SampleSpace::Continuous(axes) => axes.len(),
            SampleSpace::Finite(points) => points.first().map_or(0, Vec::len),
        }
    }
}

/// A parametric family `p(X|Θ)` with its parameter domain.
///
/// Immutable once built; clones share the underlying closures.
#[derive(Clone)]
pub struct StatisticalModel {
    name: String,
    domain: ParameterDomain,
    sample_space: SampleSpace,
    log_density: LogDensityFn,
    sample_scale: SampleScaleFn,
    closed_form_metric: Option<MetricFn>,
    metric_derivatives: Option<MetricDerivativeFn>,
    blocks: Vec<Vec<usize>>,
    factors: Option<Arc<Vec<Factor>>>,
}

/// One factor of an independent product, with the slices of `Θ` and `X` it owns.
#[derive(Clone)]
pub(crate) struct Factor {
    pub(crate) model: StatisticalModel,
    pub(crate) params: Range<usize>,
}

impl fmt::Debug for StatisticalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticalModel")
            .field("name", &self.name)
            .field("domain", &self.domain.to_string())
            .field("sample_space", &self.sample_space)
            .field("closed_form_metric", &self.closed_form_metric.is_some())
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl StatisticalModel {
    pub fn new(
        name: impl Into<String>,
        domain: ParameterDomain,
        sample_space: SampleSpace,
        log_density: LogDensityFn,
        sample_scale: SampleScaleFn,
    ) -> Self {
        let n = domain.dim();
        Self {
            name: name.into(),
            domain,
            sample_space,
            log_density,
            sample_scale,
            closed_form_metric: None,
            metric_derivatives: None,
            blocks: vec![(0..n).collect()],
            factors: None,
        }
    }

    /// Joint law of independent draws from each factor:
    /// `p(X₁, …, X_k | Θ₁, …, Θ_k) = Π p_i(X_i | Θ_i)`.
    ///
    /// Keeping the factors lets entropies and score covariances be computed
    /// factor by factor instead of over the joint sample space.
    pub fn independent_product(
        name: impl Into<String>,
        factors: Vec<StatisticalModel>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if factors.is_empty() {
            return Err(ModelError::Reparametrization(format!(
                "product {name} needs at least one factor"
            )));
        }
        let mut axes = Vec::new();
        let mut params = Vec::new();
        let mut samples = Vec::new();
        for f in &factors {
            let p0 = axes.len();
            axes.extend_from_slice(f.domain().axes());
            let x0 = samples.last().map_or(0, |r: &Range<usize>| r.end);
            params.push(p0..axes.len());
            samples.push(x0..x0 + f.sample_space().dim());
        }

        let sample_space = if factors
            .iter()
            .all(|f| matches!(f.sample_space(), SampleSpace::Continuous(_)))
        {
            SampleSpace::Continuous(
                factors
                    .iter()
                    .flat_map(|f| match f.sample_space() {
                        SampleSpace::Continuous(ax) => ax.clone(),
                        SampleSpace::Finite(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else if factors
            .iter()
            .all(|f| matches!(f.sample_space(), SampleSpace::Finite(_)))
        {
            let mut points: Vec<Vec<f64>> = vec![Vec::new()];
            for f in &factors {
                let SampleSpace::Finite(pts) = f.sample_space() else {
                    unreachable!()
                };
                points = points
                    .iter()
                    .flat_map(|head| {
                        pts.iter().map(move |p| {
                            let mut v = head.clone();
                            v.extend_from_slice(p);
                            v
                        })
                    })
                    .collect();
            }
            SampleSpace::Finite(points)
        } else {
            return Err(ModelError::Reparametrization(format!(
                "product {name} mixes continuous and finite sample spaces"
            )));
        };

        let parts: Arc<Vec<(StatisticalModel, Range<usize>, Range<usize>)>> = Arc::new(
            factors
                .iter()
                .cloned()
                .zip(params.iter().cloned())
                .zip(samples.iter().cloned())
                .map(|((m, p), x)| (m, p, x))
                .collect(),
        );

        let lp = parts.clone();
        let log_density: LogDensityFn = Arc::new(move |x: &[f64], th: &[f64]| {
            lp.iter()
                .map(|(m, p, s)| m.log_density(&x[s.clone()], &th[p.clone()]))
                .sum()
        });
        let sp = parts.clone();
        let sample_scale: SampleScaleFn = Arc::new(move |th: &[f64]| {
            sp.iter()
                .flat_map(|(m, p, _)| m.sample_scale(&th[p.clone()]))
                .collect()
        });

        let n = axes.len();
        let mut out = Self::new(name, ParameterDomain::new(axes), sample_space, log_density, sample_scale);
        if factors.iter().all(|f| f.has_closed_form_metric()) {
            let mp = parts.clone();
            out.closed_form_metric = Some(Arc::new(move |th: &[f64]| {
                let mut g = MetricMatrix::zeros(n);
                for (m, p, _) in mp.iter() {
                    let gb = m.closed_form_metric(&th[p.clone()]).expect("checked");
                    for (i, a) in p.clone().enumerate() {
                        for (j, b) in p.clone().enumerate() {
                            g[(a, b)] = gb[(i, j)];
                        }
                    }
                }
                g
            }));
        }
        if factors.iter().all(|f| f.metric_derivatives.is_some()) {
            let dp = parts.clone();
            out.metric_derivatives = Some(Arc::new(move |th: &[f64]| {
                let mut out = vec![MetricMatrix::zeros(n); n];
                for (m, p, _) in dp.iter() {
                    let db = m.metric_derivatives(&th[p.clone()]).expect("checked");
                    for (k, dk) in p.clone().zip(db) {
                        for (i, a) in p.clone().enumerate() {
                            for (j, b) in p.clone().enumerate() {
                                out[k][(a, b)] = dk[(i, j)];
                            }
                        }
                    }
                }
                out
            }));
        }
        out.blocks = params.iter().map(|r| r.clone().collect()).collect();
        out.factors = Some(Arc::new(
            factors
                .into_iter()
                .zip(params)
                .map(|(model, params)| Factor { model, params })
                .collect(),
        ));
        Ok(out)
    }

    pub fn with_closed_form_metric(mut self, metric: MetricFn) -> Self {
        self.closed_form_metric = Some(metric);
        self
    }

    pub fn with_metric_derivatives(mut self, derivatives: MetricDerivativeFn) -> Self {
        self.metric_derivatives = Some(derivatives);
        self
    }

    /// Declare groups of coordinates belonging to statistically independent
    /// factors. The metric is then block-diagonal and each block depends only
    /// on its own coordinates.
    pub fn with_independent_blocks(mut self, blocks: Vec<Vec<usize>>) -> Self {
        let mut seen: Vec<usize> = blocks.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(
            seen,
            (0..self.dim()).collect::<Vec<_>>(),
            "blocks must partition the coordinates"
        );
        self.blocks = blocks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &ParameterDomain {
        &self.domain
    }

    pub fn sample_space(&self) -> &SampleSpace {
        &self.sample_space
    }

    pub fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.log_density)(x, theta)
    }

    pub fn sample_scale(&self, theta: &[f64]) -> Vec<(f64, f64)> {
        (self.sample_scale)(theta)
    }

    pub fn has_closed_form_metric(&self) -> bool {
        self.closed_form_metric.is_some()
    }

    pub fn closed_form_metric(&self, theta: &[f64]) -> Option<MetricMatrix> {
        self.closed_form_metric.as_ref().map(|g| g(theta))
    }

    pub fn metric_derivatives(&self, theta: &[f64]) -> Option<Vec<MetricMatrix>> {
        self.metric_derivatives.as_ref().map(|d| d(theta))
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Factors of an independent product and the coordinate ranges they own.
    pub(crate) fn factors(&self) -> Option<&[Factor]> {
        self.factors.as_deref().map(|v| v.as_slice())
    }

    pub(crate) fn log_density_fn(&self) -> &LogDensityFn {
        &self.log_density
    }

    pub(crate) fn sample_scale_fn(&self) -> &SampleScaleFn {
        &self.sample_scale
    }

    pub(crate) fn closed_form_metric_fn(&self) -> Option<&MetricFn> {
        self.closed_form_metric.as_ref()
    }
}
