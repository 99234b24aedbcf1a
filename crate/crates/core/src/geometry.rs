//! Local differential geometry of a model: Fisher density, Christoffel
//! symbols of the Levi-Civita connection, and the scalar curvature.
//!
//! Curvature is a diagnostic; nothing in the entropy pipeline consumes it.
//! Its sign convention makes the Gaussian manifold negatively curved.

use crate::models::{fisher_metric, ModelError, StatisticalModel};
use crate::numerics::{Cholesky, MetricMatrix, NumericsError};

/// Default relative finite-difference step for metric derivatives.
pub const DEFAULT_GEOMETRY_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("metric at {theta:?} is not positive definite: {source}")]
    NotPositiveDefinite {
        theta: Vec<f64>,
        #[source]
        source: NumericsError,
    },
}

/// `Γ^k_{lm}` stored as `data[(k·n + l)·n + m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTensor {
    n: usize,
    data: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize, m: usize) -> f64 {
        self.data[(k * self.n + l) * self.n + m]
    }

    fn set(&mut self, k: usize, l: usize, m: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + l) * n + m] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest `|Γ^k_{lm} − Γ^k_{ml}|`.
    pub fn lower_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for l in 0..n {
                for m in (l + 1)..n {
                    worst = worst.max((self.get(k, l, m) - self.get(k, m, l)).abs());
                }
            }
        }
        worst
    }

    fn symmetrize_lower(&mut self) {
        let n = self.n;
        for k in 0..n {
            for l in 0..n {
                for m in (l + 1)..n {
                    let avg = 0.5 * (self.get(k, l, m) + self.get(k, m, l));
                    self.set(k, l, m, avg);
                    self.set(k, m, l, avg);
                }
            }
        }
    }

    /// `−Γ^k_{lm} v^l v^m` for every `k`: the geodesic acceleration.
    pub fn contract_velocity(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for l in 0..n {
                let base = (k * n + l) * n;
                let mut row = 0.0;
                for m in 0..n {
                    row += self.data[base + m] * v[m];
                }
                acc += row * v[l];
            }
            *o = -acc;
        }
    }
}

fn steps(theta: &[f64], h: f64) -> Vec<f64> {
    theta.iter().map(|t| h * t.abs().max(1.0)).collect()
}

fn positive_definite(theta: &[f64], g: &MetricMatrix) -> Result<Cholesky, GeometryError> {
    g.cholesky().map_err(|source| GeometryError::NotPositiveDefinite {
        theta: theta.to_vec(),
        source,
    })
}

/// `ρ(Θ) = √det g_{μν}(Θ)`.
pub fn fisher_density(model: &StatisticalModel, theta: &[f64]) -> Result<f64, GeometryError> {
    let g = fisher_metric(model, theta)?;
    Ok(positive_definite(theta, &g)?.sqrt_det())
}

/// `[∂_0 g, …, ∂_{n-1} g]`: registered closed forms when present, otherwise
/// central differences with relative step `h` (needs `2h` clearance).
pub fn metric_derivatives(
    model: &StatisticalModel,
    theta: &[f64],
    h: f64,
) -> Result<Vec<MetricMatrix>, GeometryError> {
    model.domain().check(theta)?;
    if let Some(d) = model.metric_derivatives(theta) {
        return Ok(d);
    }
    if !(h > 0.0) {
        return Err(ModelError::InvalidStep(h).into());
    }
    let dh = steps(theta, h);
    let reach: Vec<f64> = dh.iter().map(|d| 2.0 * d).collect();
    model.domain().check_reach(theta, &reach)?;
    let n = model.dim();
    let mut out = Vec::with_capacity(n);
    let mut tp = theta.to_vec();
    for k in 0..n {
        tp[k] = theta[k] + dh[k];
        let up = fisher_metric(model, &tp)?;
        tp[k] = theta[k] - dh[k];
        let dn = fisher_metric(model, &tp)?;
        tp[k] = theta[k];
        let mut d = MetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] = (up[(i, j)] - dn[(i, j)]) / (2.0 * dh[k]);
            }
        }
        out.push(d);
    }
    Ok(out)
}

/// `Γ^k_{lm} = ½ g^{kr}(∂_l g_{rm} + ∂_m g_{rl} − ∂_r g_{lm})`, not symmetrized.
pub fn christoffel_from_parts(g_inv: &MetricMatrix, dg: &[MetricMatrix]) -> ChristoffelTensor {
    let n = g_inv.dim();
    // lowered symbols Γ_{r,lm}
    let mut lowered = vec![0.0; n * n * n];
    for r in 0..n {
        for l in 0..n {
            for m in 0..n {
                lowered[(r * n + l) * n + m] =
                    0.5 * (dg[l][(r, m)] + dg[m][(r, l)] - dg[r][(l, m)]);
            }
        }
    }
    let mut out = ChristoffelTensor::zeros(n);
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += g_inv[(k, r)] * lowered[(r * n + l) * n + m];
                }
                out.set(k, l, m, acc);
            }
        }
    }
    out
}

/// Christoffel symbols at `theta`, symmetric in the lower indices.
pub fn christoffel(
    model: &StatisticalModel,
    theta: &[f64],
    h: f64,
) -> Result<ChristoffelTensor, GeometryError> {
    let mut gamma = christoffel_raw(model, theta, h)?;
    gamma.symmetrize_lower();
    Ok(gamma)
}

/// As [`christoffel`] but without the final symmetrization, for checking it.
pub fn christoffel_raw(
    model: &StatisticalModel,
    theta: &[f64],
    h: f64,
) -> Result<ChristoffelTensor, GeometryError> {
    let g = fisher_metric(model, theta)?;
    let g_inv = positive_definite(theta, &g)?.inverse();
    let dg = metric_derivatives(model, theta, h)?;
    Ok(christoffel_from_parts(&g_inv, &dg))
}

/// Ricci scalar `R = g^{σν} R_{σν}` with
/// `R_{σν} = ∂_ρ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{ρσ} + Γ^ρ_{ρλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{ρσ}`.
///
/// Derivatives of `Γ` come from central differences with relative step `h`;
/// the point needs `4h` clearance from the boundary.
pub fn scalar_curvature(
    model: &StatisticalModel,
    theta: &[f64],
    h: f64,
) -> Result<f64, GeometryError> {
    if !(h > 0.0) {
        return Err(ModelError::InvalidStep(h).into());
    }
    let dh = steps(theta, h);
    let reach: Vec<f64> = dh.iter().map(|d| 4.0 * d).collect();
    model.domain().check_reach(theta, &reach)?;
    let n = model.dim();

    let gamma = christoffel(model, theta, h)?;
    let mut d_gamma = Vec::with_capacity(n);
    let mut tp = theta.to_vec();
    for k in 0..n {
        tp[k] = theta[k] + dh[k];
        let up = christoffel(model, &tp, h)?;
        tp[k] = theta[k] - dh[k];
        let dn = christoffel(model, &tp, h)?;
        tp[k] = theta[k];
        let d: Vec<f64> = up
            .as_slice()
            .iter()
            .zip(dn.as_slice())
            .map(|(a, b)| (a - b) / (2.0 * dh[k]))
            .collect();
        d_gamma.push(d);
    }
    let dg = |der: usize, k: usize, l: usize, m: usize| d_gamma[der][(k * n + l) * n + m];

    let mut ricci = MetricMatrix::zeros(n);
    for s in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for r in 0..n {
                acc += dg(r, r, v, s) - dg(v, r, r, s);
                for l in 0..n {
                    acc += gamma.get(r, r, l) * gamma.get(l, v, s)
                        - gamma.get(r, v, l) * gamma.get(l, r, s);
                }
            }
            ricci[(s, v)] = acc;
        }
    }
    let g = fisher_metric(model, theta)?;
    let g_inv = positive_definite(theta, &g)?.inverse();
    let mut r = 0.0;
    for s in 0..n {
        for v in 0..n {
            r += g_inv[(s, v)] * ricci[(s, v)];
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{catalog, reparametrize, Reparametrization};

    #[test]
    fn density_examples() {
        let g = catalog("gaussian_1d").unwrap();
        assert!((fisher_density(&g, &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-8);
        assert!((fisher_density(&g, &[0.0, 2.0]).unwrap() - 0.353_553_4).abs() < 1e-7);
        let m = catalog("gaussian_mean_only").unwrap();
        assert_eq!(fisher_density(&m, &[-12.0]).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_christoffels_at_unit_sigma() {
        let g = catalog("gaussian_1d").unwrap();
        let c = christoffel(&g, &[0.4, 1.0], DEFAULT_GEOMETRY_STEP).unwrap();
        // indices: 0 = μ, 1 = σ
        let expect = |k, l, m| match (k, l, m) {
            (0, 0, 1) | (0, 1, 0) => -1.0,
            (1, 0, 0) => 0.5,
            (1, 1, 1) => -1.0,
            _ => 0.0,
        };
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    assert!((c.get(k, l, m) - expect(k, l, m)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn flat_and_exponential_christoffels() {
        let m = catalog("gaussian_mean_only").unwrap();
        assert_eq!(
            christoffel(&m, &[3.0], DEFAULT_GEOMETRY_STEP).unwrap(),
            ChristoffelTensor::zeros(1)
        );
        let e = catalog("exponential_rate").unwrap();
        let c = christoffel(&e, &[1.0], DEFAULT_GEOMETRY_STEP).unwrap();
        assert!((c.get(0, 0, 0) + 1.0).abs() < 1e-5);
    }

    #[test]
    fn difference_route_matches_closed_derivatives() {
        // the log-σ model has no registered derivatives
        let g = catalog("gaussian_1d").unwrap();
        let r = reparametrize(&g, Reparametrization::log_axis(g.domain(), 1).unwrap()).unwrap();
        let c = christoffel(&r, &[0.2, 0.0], DEFAULT_GEOMETRY_STEP).unwrap();
        // g' = diag(e^{-2s}, 2): Γ^μ_{μs} = -1, Γ^s_{μμ} = e^{-2s}/2
        assert!((c.get(0, 0, 1) + 1.0).abs() < 1e-6);
        assert!((c.get(1, 0, 0) - 0.5).abs() < 1e-6);
        assert!(c.get(1, 1, 1).abs() < 1e-6);
    }

    #[test]
    fn curvature_examples() {
        let m = catalog("gaussian_mean_only").unwrap();
        assert!(scalar_curvature(&m, &[0.0], DEFAULT_GEOMETRY_STEP).unwrap().abs() < 1e-4);
        let g = catalog("gaussian_1d").unwrap();
        for theta in [[0.0, 1.0], [2.0, 0.3], [-3.0, 5.0]] {
            let r = scalar_curvature(&g, &theta, DEFAULT_GEOMETRY_STEP).unwrap();
            assert!((r + 1.0).abs() < 1e-3, "{theta:?}: {r}");
        }
        let p = catalog("gaussian_product_2").unwrap();
        let r = scalar_curvature(&p, &[0.0, 1.0, 1.0, 0.5], DEFAULT_GEOMETRY_STEP).unwrap();
        assert!((r + 2.0).abs() < 1e-2, "{r}");
    }

    #[test]
    fn boundary_proximity_is_an_error() {
        let g = catalog("gaussian_1d").unwrap();
        let r = reparametrize(&g, Reparametrization::identity(g.domain().clone())).unwrap();
        // no registered derivatives, so the difference stencil needs room
        assert!(christoffel(&r, &[0.0, 1e-4], 1e-4).is_err());
        assert!(scalar_curvature(&g, &[0.0, 3e-4], 1e-4).is_err());
    }
}
