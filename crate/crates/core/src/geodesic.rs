//! Geodesic flow `θ̈ᵏ + Γᵏ_{lm} θ̇ˡ θ̇ᵐ = 0` on a model's manifold, and the
//! coordinate box each trajectory prefix spans.

use crate::geometry::{christoffel, GeometryError, DEFAULT_GEOMETRY_STEP};
use crate::models::{fisher_metric, ModelError, ParameterDomain, ParameterPoint, StatisticalModel};
use crate::numerics::{
    hermite, hermite_derivative, integrate_ode, HyperRectangle, Interval, OdeError, OdeOptions,
    OdeState, OdeStop, RhsFailure,
};

/// Boxes narrower than this (relative to the axis scale) are degenerate.
pub const DEGENERATE_WIDTH: f64 = 1e-12;

/// Step floor relative to the duration.
const MIN_STEP_FRACTION: f64 = 1e-10;
/// A stalled integration this close to an edge counts as a boundary exit.
const BOUNDARY_CLEARANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("initial velocity has {got} components, model has {expected}")]
    VelocityDimension { expected: usize, got: usize },
    #[error("initial velocity is zero or not finite")]
    ZeroVelocity,
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("geodesic integration failed: {0}")]
    Integration(String),
    #[error("tau = {tau} is outside the path range (0, {end}]")]
    TauOutOfRange { tau: f64, end: f64 },
    #[error("axis {axis} is degenerate at tau = {tau} (width {width:e})")]
    DegenerateAxis { axis: usize, tau: f64, width: f64 },
}

impl From<ModelError> for GeodesicError {
    fn from(e: ModelError) -> Self {
        GeodesicError::Geometry(e.into())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Rescale the initial velocity to `g(θ̇, θ̇) = 1`.
    pub normalize_speed: bool,
    /// Upper bound on the affine step, which keeps cubic interpolation between
    /// samples well inside the integration tolerance.
    pub max_step: f64,
    /// Relative step for metric derivatives when the model has no closed form.
    pub fd_step: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            normalize_speed: true,
            max_step: 0.05,
            fd_step: DEFAULT_GEOMETRY_STEP,
        }
    }
}

impl GeodesicOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample {
    pub s: f64,
    pub theta: ParameterPoint,
    pub theta_dot: Vec<f64>,
}

/// Why a path ends before the requested duration.
#[derive(Debug, Clone, PartialEq)]
pub enum GeodesicExit {
    /// The trajectory reached the edge of the parameter domain.
    DomainBoundary { s: f64, detail: String },
    /// The integrator gave up for another reason.
    Integrator { s: f64, detail: String },
}

impl GeodesicExit {
    pub fn s(&self) -> f64 {
        match self {
            GeodesicExit::DomainBoundary { s, .. } | GeodesicExit::Integrator { s, .. } => *s,
        }
    }
}

impl std::fmt::Display for GeodesicExit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeodesicExit::DomainBoundary { s, detail } => {
                write!(f, "reached the domain boundary at s = {s}: {detail}")
            }
            GeodesicExit::Integrator { s, detail } => write!(f, "stopped at s = {s}: {detail}"),
        }
    }
}

/// Sampled geodesic `{(s_i, Θ_i, Θ̇_i)}` starting at `s = 0`.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub model_name: String,
    pub domain: ParameterDomain,
    pub samples: Vec<GeodesicSample>,
    /// `g(θ̇, θ̇)` at the start.
    pub speed: f64,
    pub requested: f64,
    pub exit: Option<GeodesicExit>,
}

impl GeodesicPath {
    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }

    pub fn is_truncated(&self) -> bool {
        self.exit.is_some()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn start(&self) -> &GeodesicSample {
        &self.samples[0]
    }

    /// Index `i` with `samples[i].s ≤ s ≤ samples[i+1].s`.
    fn bracket(&self, s: f64) -> usize {
        let idx = self.samples.partition_point(|p| p.s <= s);
        idx.saturating_sub(1).min(self.samples.len().saturating_sub(2))
    }

    /// Position and velocity at affine parameter `s`, interpolated with cubic
    /// Hermite polynomials between the bracketing samples.
    pub fn state_at(&self, s: f64) -> Result<(Vec<f64>, Vec<f64>), GeodesicError> {
        let end = self.end();
        if !(s >= 0.0) || s > end * (1.0 + 1e-14) {
            return Err(GeodesicError::TauOutOfRange { tau: s, end });
        }
        if self.samples.len() == 1 {
            let p = &self.samples[0];
            return Ok((p.theta.to_vec(), p.theta_dot.clone()));
        }
        let i = self.bracket(s);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        if s == b.s {
            return Ok((b.theta.to_vec(), b.theta_dot.clone()));
        }
        if s == a.s {
            return Ok((a.theta.to_vec(), a.theta_dot.clone()));
        }
        let n = self.dim();
        let mut pos = Vec::with_capacity(n);
        let mut vel = Vec::with_capacity(n);
        for k in 0..n {
            let (x0, v0, x1, v1) = (a.theta[k], a.theta_dot[k], b.theta[k], b.theta_dot[k]);
            pos.push(hermite(a.s, x0, v0, b.s, x1, v1, s));
            vel.push(hermite_derivative(a.s, x0, v0, b.s, x1, v1, s));
        }
        Ok((pos, vel))
    }

    pub fn position_at(&self, s: f64) -> Result<Vec<f64>, GeodesicError> {
        self.state_at(s).map(|(p, _)| p)
    }

    /// Largest `|g(θ̇,θ̇) − speed| / speed` over the samples.
    pub fn speed_drift(&self, model: &StatisticalModel) -> Result<f64, GeodesicError> {
        let mut worst = 0.0_f64;
        for p in &self.samples {
            let g = fisher_metric(model, &p.theta)?;
            let v = g.quadratic_form(&p.theta_dot);
            worst = worst.max((v - self.speed).abs() / self.speed);
        }
        Ok(worst)
    }
}

/// Solve the geodesic equation from `theta0` with velocity `theta_dot0` for
/// affine duration `tau_max`.
///
/// A trajectory that runs into the domain boundary is returned truncated with
/// [`GeodesicPath::exit`] set; only an invalid start is an error.
pub fn integrate_geodesic(
    model: &StatisticalModel,
    theta0: &[f64],
    theta_dot0: &[f64],
    tau_max: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicPath, GeodesicError> {
    let n = model.dim();
    model.domain().check(theta0)?;
    if theta_dot0.len() != n {
        return Err(GeodesicError::VelocityDimension {
            expected: n,
            got: theta_dot0.len(),
        });
    }
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(GeodesicError::InvalidDuration(tau_max));
    }
    if !theta_dot0.iter().all(|v| v.is_finite()) || theta_dot0.iter().all(|&v| v == 0.0) {
        return Err(GeodesicError::ZeroVelocity);
    }

    let g0 = fisher_metric(model, theta0)?;
    let speed0 = g0.quadratic_form(theta_dot0);
    if !(speed0 > 0.0) {
        return Err(GeodesicError::ZeroVelocity);
    }
    let (velocity, speed) = if opts.normalize_speed {
        let scale = speed0.sqrt();
        (theta_dot0.iter().map(|v| v / scale).collect::<Vec<_>>(), 1.0)
    } else {
        (theta_dot0.to_vec(), speed0)
    };

    let mut y0 = theta0.to_vec();
    y0.extend_from_slice(&velocity);

    let fd_step = opts.fd_step;
    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<(), RhsFailure> {
        let (pos, vel) = y.split_at(n);
        let gamma = christoffel(model, pos, fd_step).map_err(|e| RhsFailure(e.to_string()))?;
        dy[..n].copy_from_slice(vel);
        gamma.contract_velocity(vel, &mut dy[n..]);
        Ok(())
    };

    let ode_opts = OdeOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        first_step: None,
        max_step: opts.max_step,
        // near a boundary the flow can become singular while staying inside
        // the margin; a step floor turns that stall into a clean stop
        min_step: MIN_STEP_FRACTION * tau_max.max(1.0),
        max_steps: 2_000_000,
    };

    let (states, exit) = match integrate_ode(rhs, OdeState::new(0.0, y0), tau_max, &ode_opts) {
        Ok(states) => (states, None),
        Err(OdeError::Aborted(failure)) => {
            let s = failure.partial.last().map_or(0.0, |p| p.t);
            let last = failure.partial.last().map(|p| &p.y[..n]);
            let exit = match (failure.stop, last.and_then(|p| near_boundary(model.domain(), p))) {
                (
                    OdeStop::StepSizeUnderflow {
                        cause: Some(detail),
                        ..
                    },
                    _,
                ) => GeodesicExit::DomainBoundary { s, detail },
                (_, Some(detail)) => GeodesicExit::DomainBoundary { s, detail },
                (other, None) => GeodesicExit::Integrator {
                    s,
                    detail: format!("{other:?}"),
                },
            };
            (failure.partial, Some(exit))
        }
        Err(e) => return Err(GeodesicError::Integration(e.to_string())),
    };

    let samples = states
        .into_iter()
        .map(|st| {
            let (pos, vel) = st.y.split_at(n);
            GeodesicSample {
                s: st.t,
                theta: ParameterPoint::new(pos.to_vec()).expect("integrator keeps states finite"),
                theta_dot: vel.to_vec(),
            }
        })
        .collect();

    Ok(GeodesicPath {
        model_name: model.name().to_string(),
        domain: model.domain().clone(),
        samples,
        speed,
        requested: tau_max,
        exit,
    })
}

/// Describe the closest boundary if `theta` is within `BOUNDARY_CLEARANCE`
/// of the domain edge on some axis.
fn near_boundary(domain: &ParameterDomain, theta: &[f64]) -> Option<String> {
    for (k, (iv, &x)) in domain.axes().iter().zip(theta).enumerate() {
        let clearance = BOUNDARY_CLEARANCE * iv.margin_unit();
        for edge in [iv.lo(), iv.hi()] {
            if edge.is_finite() && (x - edge).abs() < clearance {
                return Some(format!("axis {k} at {x} is within {clearance:e} of {edge}"));
            }
        }
    }
    None
}

/// How the integration box is read off a path prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundsMode {
    /// Axis `k` spans the endpoints `θᵏ(0)` and `θᵏ(τ)`, ordered.
    #[default]
    Endpoint,
    /// Axis `k` spans the running min and max of `θᵏ` over `[0, τ]`.
    Envelope,
}

impl std::str::FromStr for BoundsMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "endpoint" => Ok(BoundsMode::Endpoint),
            "envelope" => Ok(BoundsMode::Envelope),
            other => Err(format!("unknown bounds mode `{other}` (endpoint | envelope)")),
        }
    }
}

impl std::fmt::Display for BoundsMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundsMode::Endpoint => "endpoint",
            BoundsMode::Envelope => "envelope",
        })
    }
}

/// The region `D(τ)` swept by the geodesic up to `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicBounds {
    pub rect: HyperRectangle,
    pub tau: f64,
}

/// Endpoint-mode bounds.
pub fn bounds_at(path: &GeodesicPath, tau: f64) -> Result<GeodesicBounds, GeodesicError> {
    bounds_at_with(path, tau, BoundsMode::Endpoint)
}

pub fn bounds_at_with(
    path: &GeodesicPath,
    tau: f64,
    mode: BoundsMode,
) -> Result<GeodesicBounds, GeodesicError> {
    let end = path.end();
    if !(tau > 0.0) || tau > end * (1.0 + 1e-14) {
        return Err(GeodesicError::TauOutOfRange { tau, end });
    }
    let start = path.start().theta.to_vec();
    let here = path.position_at(tau.min(end))?;
    let n = path.dim();
    let mut lo: Vec<f64> = (0..n).map(|k| start[k].min(here[k])).collect();
    let mut hi: Vec<f64> = (0..n).map(|k| start[k].max(here[k])).collect();
    if mode == BoundsMode::Envelope {
        for p in path.samples.iter().take_while(|p| p.s <= tau) {
            for k in 0..n {
                lo[k] = lo[k].min(p.theta[k]);
                hi[k] = hi[k].max(p.theta[k]);
            }
        }
    }
    let mut axes = Vec::with_capacity(n);
    for k in 0..n {
        let width = hi[k] - lo[k];
        let unit = path.domain.axes()[k].relative_unit(0.5 * (lo[k] + hi[k]));
        if !(width > DEGENERATE_WIDTH * unit) {
            return Err(GeodesicError::DegenerateAxis {
                axis: k,
                tau,
                width,
            });
        }
        axes.push(Interval::new(lo[k], hi[k]).expect("width checked"));
    }
    Ok(GeodesicBounds {
        rect: HyperRectangle::new(axes).expect("finite axes"),
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;
    use std::f64::consts::SQRT_2;

    #[test]
    fn flat_geodesic_is_a_line() {
        let m = catalog("gaussian_mean_only").unwrap();
        let path = integrate_geodesic(&m, &[0.0], &[1.0], 5.0, &GeodesicOptions::default()).unwrap();
        assert!(!path.is_truncated());
        assert_eq!(path.end(), 5.0);
        assert!((path.samples.last().unwrap().theta[0] - 5.0).abs() < 1e-8);
        for p in &path.samples {
            assert!((p.theta[0] - p.s).abs() < 1e-10);
        }
    }

    #[test]
    fn vertical_gaussian_geodesic_is_exponential() {
        let m = catalog("gaussian_1d").unwrap();
        let path = integrate_geodesic(
            &m,
            &[0.0, 1.0],
            &[0.0, 1.0 / SQRT_2],
            1.0,
            &GeodesicOptions::default(),
        )
        .unwrap();
        let last = path.samples.last().unwrap();
        assert_eq!(last.theta[0], 0.0);
        assert!((last.theta[1] - (1.0 / SQRT_2).exp()).abs() < 1e-6);
        assert!((last.theta[1] - 2.028_115_0).abs() < 1e-6);
    }

    #[test]
    fn velocity_is_normalized_by_default() {
        let m = catalog("gaussian_1d").unwrap();
        let path =
            integrate_geodesic(&m, &[0.0, 2.0], &[3.0, 1.0], 0.5, &GeodesicOptions::default()).unwrap();
        let g = fisher_metric(&m, &[0.0, 2.0]).unwrap();
        assert!((g.quadratic_form(&path.start().theta_dot) - 1.0).abs() < 1e-14);
        assert_eq!(path.speed, 1.0);
    }

    #[test]
    fn start_errors() {
        let m = catalog("gaussian_1d").unwrap();
        let o = GeodesicOptions::default();
        assert!(integrate_geodesic(&m, &[0.0, -1.0], &[1.0, 0.0], 1.0, &o).is_err());
        assert!(matches!(
            integrate_geodesic(&m, &[0.0, 1.0], &[0.0, 0.0], 1.0, &o),
            Err(GeodesicError::ZeroVelocity)
        ));
        assert!(matches!(
            integrate_geodesic(&m, &[0.0, 1.0], &[1.0], 1.0, &o),
            Err(GeodesicError::VelocityDimension { .. })
        ));
        assert!(matches!(
            integrate_geodesic(&m, &[0.0, 1.0], &[1.0, 0.0], 0.0, &o),
            Err(GeodesicError::InvalidDuration(_))
        ));
    }

    #[test]
    fn bernoulli_geodesic_stops_at_the_boundary() {
        // unit-speed Bernoulli geodesics are p = sin²(φ₀ + s/2): the edge p = 1
        // is reached at s = π - 2φ₀ < π
        let m = catalog("bernoulli").unwrap();
        let path = integrate_geodesic(&m, &[0.5], &[1.0], 10.0, &GeodesicOptions::default()).unwrap();
        let exit = path.exit.clone().expect("truncated");
        assert!(matches!(exit, GeodesicExit::DomainBoundary { .. }));
        assert!(path.end() < std::f64::consts::PI);
        for p in &path.samples {
            assert!(m.domain().contains(&p.theta));
            let expected = (std::f64::consts::FRAC_PI_4 + p.s / 2.0).sin().powi(2);
            assert!((p.theta[0] - expected).abs() < 1e-5, "s={} p={}", p.s, p.theta[0]);
        }
    }

    #[test]
    fn bounds_examples() {
        let flat = catalog("gaussian_mean_only").unwrap();
        let path = integrate_geodesic(&flat, &[0.0], &[1.0], 5.0, &GeodesicOptions::default()).unwrap();
        let b = bounds_at(&path, 3.0).unwrap();
        assert!((b.rect.axes()[0].lo()).abs() < 1e-12);
        assert!((b.rect.axes()[0].hi() - 3.0).abs() < 1e-10);

        let g = catalog("gaussian_1d").unwrap();
        let vertical = integrate_geodesic(
            &g,
            &[0.0, 1.0],
            &[0.0, 1.0 / SQRT_2],
            1.0,
            &GeodesicOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            bounds_at(&vertical, 1.0),
            Err(GeodesicError::DegenerateAxis { axis: 0, .. })
        ));
        assert!(matches!(
            bounds_at(&vertical, 2.0),
            Err(GeodesicError::TauOutOfRange { .. })
        ));
        assert!(matches!(
            bounds_at(&vertical, 0.0),
            Err(GeodesicError::TauOutOfRange { .. })
        ));
    }

    #[test]
    fn envelope_covers_turning_points() {
        // the semicircle turns around in μ, so the envelope is wider than the endpoints
        let g = catalog("gaussian_1d").unwrap();
        let path =
            integrate_geodesic(&g, &[0.0, 1.0], &[1.0, 0.5], 6.0, &GeodesicOptions::default()).unwrap();
        let e = bounds_at_with(&path, 6.0, BoundsMode::Envelope).unwrap();
        let p = bounds_at_with(&path, 6.0, BoundsMode::Endpoint).unwrap();
        assert!(e.rect.axes()[1].hi() > p.rect.axes()[1].hi());
        assert!(e.rect.volume() >= p.rect.volume());
    }

    #[test]
    fn bounds_mode_parses() {
        assert_eq!("endpoint".parse::<BoundsMode>().unwrap(), BoundsMode::Endpoint);
        assert_eq!("envelope".parse::<BoundsMode>().unwrap(), BoundsMode::Envelope);
        assert!("box".parse::<BoundsMode>().is_err());
    }
}
