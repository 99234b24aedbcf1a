//! Integration over a model's sample space.
//!
//! Unbounded axes are mapped onto finite ones with rational substitutions
//! scaled to the distribution at hand:
//!
//! ```text
//! (-inf, inf):  x = c + s·u/(1-u²),  u ∈ (-1, 1)
//! (a, inf):     x = a + s·u/(1-u),   u ∈ (0, 1)
//! (-inf, b):    x = b - s·u/(1-u),   u ∈ (0, 1)
//! ```
//!
//! Light-tailed integrands become smooth and flat at the new endpoints, so a
//! single Gauss–Legendre kernel handles every catalog family.

use crate::numerics::{integrate_box_with, HyperRectangle, Interval, QuadOptions};

use super::{ModelError, SampleSpace};

#[derive(Debug, Clone, Copy)]
enum AxisMap {
    Identity,
    Line { center: f64, scale: f64 },
    Above { lo: f64, scale: f64 },
    Below { hi: f64, scale: f64 },
}

impl AxisMap {
    fn new(iv: &Interval, (center, scale): (f64, f64)) -> Self {
        match (iv.lo().is_finite(), iv.hi().is_finite()) {
            (true, true) => AxisMap::Identity,
            (false, false) => AxisMap::Line { center, scale },
            (true, false) => AxisMap::Above { lo: iv.lo(), scale },
            (false, true) => AxisMap::Below { hi: iv.hi(), scale },
        }
    }

    fn u_range(&self, iv: &Interval) -> (f64, f64) {
        match self {
            AxisMap::Identity => (iv.lo(), iv.hi()),
            AxisMap::Line { .. } => (-1.0, 1.0),
            AxisMap::Above { .. } | AxisMap::Below { .. } => (0.0, 1.0),
        }
    }

    /// `(x(u), dx/du)`.
    fn apply(&self, u: f64) -> (f64, f64) {
        match *self {
            AxisMap::Identity => (u, 1.0),
            AxisMap::Line { center, scale } => {
                let d = 1.0 - u * u;
                (center + scale * u / d, scale * (1.0 + u * u) / (d * d))
            }
            AxisMap::Above { lo, scale } => {
                let d = 1.0 - u;
                (lo + scale * u / d, scale / (d * d))
            }
            AxisMap::Below { hi, scale } => {
                let d = 1.0 - u;
                (hi - scale * u / d, scale / (d * d))
            }
        }
    }
}

/// `∫ f(x) dx` over the sample space, or `Σ f(x)` for a finite one.
///
/// `scales` gives per-axis `(location, scale)` for the substitutions. The
/// integrand is treated as zero wherever the mapped `x` overflows or `f`
/// returns exactly zero, which lets callers return `p(x)·…` with `p`
/// underflowing in the far tails.
pub(crate) fn integrate_sample_space<F>(
    space: &SampleSpace,
    scales: &[(f64, f64)],
    f: F,
    opts: &QuadOptions,
    what: &'static str,
) -> Result<f64, ModelError>
where
    F: Fn(&[f64]) -> f64,
{
    match space {
        SampleSpace::Finite(points) => Ok(points.iter().map(|x| f(x)).sum()),
        SampleSpace::Continuous(axes) => {
            let maps: Vec<AxisMap> = axes
                .iter()
                .zip(scales)
                .map(|(iv, &s)| AxisMap::new(iv, s))
                .collect();
            let bounds: Vec<(f64, f64)> = axes
                .iter()
                .zip(&maps)
                .map(|(iv, m)| m.u_range(iv))
                .collect();
            let rect = HyperRectangle::from_bounds(&bounds)
                .map_err(|source| ModelError::Numerics { what, source })?;
            let integrand = |u: &[f64]| -> f64 {
                let mut x = [0.0; 8];
                let mut heap;
                let xs: &mut [f64] = if u.len() <= x.len() {
                    &mut x[..u.len()]
                } else {
                    heap = vec![0.0; u.len()];
                    &mut heap
                };
                let mut jac = 1.0;
                for (k, m) in maps.iter().enumerate() {
                    let (xk, dk) = m.apply(u[k]);
                    if !xk.is_finite() || !dk.is_finite() {
                        return 0.0;
                    }
                    xs[k] = xk;
                    jac *= dk;
                }
                let v = f(xs);
                if v == 0.0 {
                    0.0
                } else {
                    v * jac
                }
            };
            let r = integrate_box_with(integrand, &rect, opts)
                .map_err(|source| ModelError::Numerics { what, source })?;
            if !r.converged {
                return Err(ModelError::QuadratureNotConverged {
                    what,
                    value: r.value,
                    error: r.error,
                });
            }
            Ok(r.value)
        }
    }
}
