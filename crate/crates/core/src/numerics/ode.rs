//! Dormand–Prince 5(4) integrator with PI step-size control.

use super::NumericsError;

/// A point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub t: f64,
    pub y: Vec<f64>,
}

impl OdeState {
    pub fn new(t: f64, y: Vec<f64>) -> Self {
        Self { t, y }
    }
}

/// Signals that the vector field cannot be evaluated at the trial state
/// (for instance, the state left the domain). The step is rejected and retried
/// with a smaller size.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsFailure(pub String);

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; chosen automatically when `None`.
    pub first_step: Option<f64>,
    pub max_step: f64,
    /// Absolute floor on the step size; the integration stops below it.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            first_step: None,
            max_step: f64::INFINITY,
            min_step: 0.0,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

/// Why an integration stopped before `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeStop {
    StepSizeUnderflow { t: f64, step: f64, cause: Option<String> },
    NonFiniteDerivative { t: f64 },
    TooManySteps { t: f64 },
}

/// Failed integration. `partial` holds every step accepted before the stop.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure {
    pub stop: OdeStop,
    pub partial: Vec<OdeState>,
}

impl std::fmt::Display for OdeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.stop {
            OdeStop::StepSizeUnderflow { t, step, cause } => {
                write!(f, "step size underflow at t = {t} (h = {step:e})")?;
                if let Some(c) = cause {
                    write!(f, ": {c}")?;
                }
                Ok(())
            }
            OdeStop::NonFiniteDerivative { t } => write!(f, "non-finite derivative at t = {t}"),
            OdeStop::TooManySteps { t } => write!(f, "step limit reached at t = {t}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error(transparent)]
    Setup(#[from] NumericsError),
    #[error("vector field failed at the initial state: {0}")]
    InitialRhs(String),
    #[error("integration aborted: {0}")]
    Aborted(OdeFailure),
}

// Dormand–Prince tableau.
/// Local errors are held to this fraction of the requested tolerance, which
/// keeps the accumulated global error on smooth problems within a small
/// multiple of the request.
const LOCAL_TOL_SCALE: f64 = 0.25;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const REJECT_SHRINK: f64 = 0.25;

/// Integrate `y' = rhs(t, y)` from `y0.t` to `t_end`.
///
/// Returns the initial state followed by every accepted step; the last entry
/// sits exactly at `t_end`.
pub fn integrate_ode<F>(
    mut rhs: F,
    y0: OdeState,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Vec<OdeState>, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), RhsFailure>,
{
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(NumericsError::InvalidTolerance.into());
    }
    if !(opts.max_step > 0.0) {
        return Err(NumericsError::InvalidTolerance.into());
    }
    if !y0.y.iter().all(|v| v.is_finite()) || !y0.t.is_finite() {
        return Err(NumericsError::NonFiniteState.into());
    }
    if !(t_end >= y0.t) {
        return Err(NumericsError::InvalidSpan {
            start: y0.t,
            end: t_end,
        }
        .into());
    }

    let dim = y0.y.len();
    let mut t = y0.t;
    let mut y = y0.y.clone();
    let mut out = vec![y0];
    if t_end == t {
        return Ok(out);
    }

    let mut k1 = vec![0.0; dim];
    rhs(t, &y, &mut k1).map_err(|e| OdeError::InitialRhs(e.0))?;
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(OdeError::InitialRhs("non-finite derivative".into()));
    }

    let span = t_end - t;
    let mut h = opts
        .first_step
        .unwrap_or_else(|| initial_step(&mut rhs, t, &y, &k1, opts))
        .min(opts.max_step)
        .min(span);
    if !(h > 0.0) {
        h = span.min(opts.max_step) * 1e-6;
    }

    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut yt = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];

    let mut err_prev = 1e-4_f64;
    let mut last_reject = false;
    let mut steps = 0usize;

    macro_rules! stop {
        ($stop:expr) => {
            return Err(OdeError::Aborted(OdeFailure {
                stop: $stop,
                partial: out,
            }))
        };
    }

    loop {
        if steps >= opts.max_steps {
            stop!(OdeStop::TooManySteps { t });
        }
        let min_step = (16.0 * f64::EPSILON * t.abs().max(span)).max(opts.min_step);
        if h < min_step {
            stop!(OdeStop::StepSizeUnderflow {
                t,
                step: h,
                cause: None
            });
        }
        let hit_end = t + h >= t_end;
        if hit_end {
            h = t_end - t;
        }

        match dp_stages(
            &mut rhs, t, h, &y, &k1, &mut k2, &mut k3, &mut k4, &mut k5, &mut k6, &mut k7,
            &mut yt, &mut ynew,
        ) {
            Err(cause) => {
                let next = h * REJECT_SHRINK;
                if next < min_step {
                    stop!(OdeStop::StepSizeUnderflow {
                        t,
                        step: next,
                        cause: Some(cause.0)
                    });
                }
                h = next;
                last_reject = true;
                continue;
            }
            Ok(()) => {}
        }
        if !ynew.iter().chain(k7.iter()).all(|v| v.is_finite()) {
            let next = h * REJECT_SHRINK;
            if next < min_step {
                stop!(OdeStop::NonFiniteDerivative { t });
            }
            h = next;
            last_reject = true;
            continue;
        }

        // scaled RMS error of the embedded 4th-order solution
        let mut acc = 0.0;
        for i in 0..dim {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = LOCAL_TOL_SCALE * (opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs()));
            acc += (e / sc).powi(2);
        }
        let err = if dim == 0 { 0.0 } else { (acc / dim as f64).sqrt() };

        if err <= 1.0 {
            steps += 1;
            t = if hit_end { t_end } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            out.push(OdeState::new(t, y.clone()));
            if hit_end {
                return Ok(out);
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)
            };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_reject {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.max_step);
            err_prev = err.max(1e-4);
            last_reject = false;
        } else {
            let fac = (SAFETY * err.powf(-ALPHA)).max(FAC_MIN);
            h *= fac;
            last_reject = true;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dp_stages<F>(
    rhs: &mut F,
    t: f64,
    h: f64,
    y: &[f64],
    k1: &[f64],
    k2: &mut [f64],
    k3: &mut [f64],
    k4: &mut [f64],
    k5: &mut [f64],
    k6: &mut [f64],
    k7: &mut [f64],
    yt: &mut [f64],
    ynew: &mut [f64],
) -> Result<(), RhsFailure>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), RhsFailure>,
{
    let n = y.len();
    for i in 0..n {
        yt[i] = y[i] + h * A21 * k1[i];
    }
    rhs(t + C2 * h, yt, k2)?;
    for i in 0..n {
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs(t + C3 * h, yt, k3)?;
    for i in 0..n {
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(t + C4 * h, yt, k4)?;
    for i in 0..n {
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(t + C5 * h, yt, k5)?;
    for i in 0..n {
        yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(t + h, yt, k6)?;
    for i in 0..n {
        ynew[i] =
            y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(t + h, ynew, k7)
}

/// Starting step heuristic (Hairer, Nørsett & Wanner, II.4).
fn initial_step<F>(rhs: &mut F, t: f64, y: &[f64], f0: &[f64], opts: &OdeOptions) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), RhsFailure>,
{
    let n = y.len().max(1) as f64;
    let scale: Vec<f64> = y
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter()
            .zip(&scale)
            .map(|(a, s)| (a / s).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    if rhs(t + h0, &y1, &mut f1).is_err() || !f1.iter().all(|v| v.is_finite()) {
        return h0;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Cubic Hermite interpolation of a second-order trajectory component given
/// position and velocity at both ends of `[t0, t1]`.
pub fn hermite(t0: f64, x0: f64, v0: f64, t1: f64, x1: f64, v1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * x0 + h10 * h * v0 + h01 * x1 + h11 * h * v1
}

/// Derivative of [`hermite`] with respect to `t`.
pub fn hermite_derivative(t0: f64, x0: f64, v0: f64, t1: f64, x1: f64, v1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    (d00 * x0 + d01 * x1) / h + d10 * v0 + d11 * v1
}
