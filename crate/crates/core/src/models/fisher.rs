//! Fisher–Rao metric by three routes: registered closed form, the covariance
//! of scores integrated over the sample space, and the negative Hessian of the
//! relative entropy at coincidence.

use crate::numerics::{MetricMatrix, QuadOptions};

use super::sample::integrate_sample_space;
use super::{ModelError, StatisticalModel};

/// Relative step for [`fisher_metric_numeric`]: `h · max(1, |θᵏ|)` per axis.
pub const DEFAULT_METRIC_STEP: f64 = 1e-3;

/// Relative step for finite-difference scores.
const SCORE_STEP: f64 = 1e-5;

const SCORE_QUAD: QuadOptions = QuadOptions {
    rel_tol: 1e-10,
    abs_tol: 1e-15,
    max_panels: 20_000,
};

const SAMPLE_QUAD: QuadOptions = QuadOptions {
    rel_tol: 1e-11,
    abs_tol: 1e-15,
    max_panels: 20_000,
};

fn steps(theta: &[f64], h: f64) -> Vec<f64> {
    theta.iter().map(|t| h * t.abs().max(1.0)).collect()
}

/// `∫ p(X|Θ) dX`; equals one for a properly normalized family.
pub fn total_probability(model: &StatisticalModel, theta: &[f64]) -> Result<f64, ModelError> {
    model.domain().check(theta)?;
    if let Some(factors) = model.factors() {
        let mut acc = 1.0;
        for f in factors {
            acc *= total_probability(&f.model, &theta[f.params.clone()])?;
        }
        return Ok(acc);
    }
    let ld = model.log_density_fn();
    integrate_sample_space(
        model.sample_space(),
        &model.sample_scale(theta),
        |x| ld(x, theta).exp(),
        &SAMPLE_QUAD,
        "total probability",
    )
}

/// `S(Θ′, Θ) = −∫ p(X|Θ′) log[p(X|Θ′)/p(X|Θ)] dX`.
///
/// The sign is the one that makes `S ≤ 0`, vanishing only at `Θ′ = Θ`.
pub fn relative_entropy(
    model: &StatisticalModel,
    theta_prime: &[f64],
    theta: &[f64],
) -> Result<f64, ModelError> {
    model.domain().check(theta_prime)?;
    model.domain().check(theta)?;
    if let Some(factors) = model.factors() {
        // relative entropy is additive over independent factors
        let mut acc = 0.0;
        for f in factors {
            let r = f.params.clone();
            acc += relative_entropy(&f.model, &theta_prime[r.clone()], &theta[r])?;
        }
        return Ok(acc);
    }
    let ld = model.log_density_fn();
    let kl = integrate_sample_space(
        model.sample_space(),
        &model.sample_scale(theta_prime),
        |x| {
            let lp = ld(x, theta_prime);
            if lp == f64::NEG_INFINITY {
                return 0.0;
            }
            lp.exp() * (lp - ld(x, theta))
        },
        &SAMPLE_QUAD,
        "relative entropy",
    )?;
    if !kl.is_finite() {
        return Err(ModelError::Numerics {
            what: "relative entropy",
            source: crate::numerics::NumericsError::NonFiniteIntegrand {
                point: theta.to_vec(),
                value: kl,
            },
        });
    }
    Ok(-kl)
}

/// The metric `g_{μν}(Θ)`: closed form when the model registers one,
/// otherwise [`fisher_metric_numeric`] with the default step.
pub fn fisher_metric(model: &StatisticalModel, theta: &[f64]) -> Result<MetricMatrix, ModelError> {
    model.domain().check(theta)?;
    match model.closed_form_metric(theta) {
        Some(g) => Ok(g),
        None => fisher_metric_numeric(model, theta, DEFAULT_METRIC_STEP),
    }
}

/// `−∂²S(Θ′,Θ)/∂Θ′^μ∂Θ′^ν` at `Θ′ = Θ` by central differences with relative
/// step `h`, extrapolated against step `h/2`.
pub fn fisher_metric_numeric(
    model: &StatisticalModel,
    theta: &[f64],
    h: f64,
) -> Result<MetricMatrix, ModelError> {
    if !(h > 0.0) {
        return Err(ModelError::InvalidStep(h));
    }
    model.domain().check(theta)?;
    let dh = steps(theta, h);
    let reach: Vec<f64> = dh.iter().map(|d| 2.0 * d).collect();
    model.domain().check_reach(theta, &reach)?;

    // one Richardson step on the O(h²) truncation error: (4 D(h/2) − D(h)) / 3
    let coarse = hessian_of_entropy(model, theta, &dh)?;
    let half: Vec<f64> = dh.iter().map(|d| 0.5 * d).collect();
    let fine = hessian_of_entropy(model, theta, &half)?;
    let n = model.dim();
    let mut g = MetricMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = (4.0 * fine[(i, j)] - coarse[(i, j)]) / 3.0;
        }
    }
    g.symmetrize();
    if let Err(e) = g.cholesky() {
        return Err(ModelError::IndefiniteMetric {
            detail: e.to_string(),
        });
    }
    Ok(g)
}

/// `−∂²S/∂Θ′∂Θ′` by central differences with per-axis steps `dh`.
fn hessian_of_entropy(
    model: &StatisticalModel,
    theta: &[f64],
    dh: &[f64],
) -> Result<MetricMatrix, ModelError> {
    let n = model.dim();
    let s = |offsets: &[(usize, f64)]| -> Result<f64, ModelError> {
        let mut tp = theta.to_vec();
        for &(k, d) in offsets {
            tp[k] += d;
        }
        relative_entropy(model, &tp, theta)
    };

    let mut g = MetricMatrix::zeros(n);
    for mu in 0..n {
        let hm = dh[mu];
        let plus = s(&[(mu, hm)])?;
        let minus = s(&[(mu, -hm)])?;
        // S(Θ, Θ) = 0
        g[(mu, mu)] = -(plus + minus) / (hm * hm);
        for nu in (mu + 1)..n {
            let hn = dh[nu];
            let pp = s(&[(mu, hm), (nu, hn)])?;
            let pm = s(&[(mu, hm), (nu, -hn)])?;
            let mp = s(&[(mu, -hm), (nu, hn)])?;
            let mm = s(&[(mu, -hm), (nu, -hn)])?;
            let v = -(pp - pm - mp + mm) / (4.0 * hm * hn);
            g[(mu, nu)] = v;
            g[(nu, mu)] = v;
        }
    }
    Ok(g)
}

/// `∫ p ∂_μ log p ∂_ν log p dX` with scores from central differences of the
/// log-density. Independent of both the closed form and the entropy route.
pub fn fisher_metric_quadrature(
    model: &StatisticalModel,
    theta: &[f64],
) -> Result<MetricMatrix, ModelError> {
    model.domain().check(theta)?;
    let dh = steps(theta, SCORE_STEP);
    model.domain().check_reach(theta, &dh)?;
    let n = model.dim();
    if let Some(factors) = model.factors() {
        // scores of independent factors are uncorrelated: the metric is block diagonal
        let mut g = MetricMatrix::zeros(n);
        for f in factors {
            let r = f.params.clone();
            let gb = fisher_metric_quadrature(&f.model, &theta[r.clone()])?;
            for (i, a) in r.clone().enumerate() {
                for (j, b) in r.clone().enumerate() {
                    g[(a, b)] = gb[(i, j)];
                }
            }
        }
        return Ok(g);
    }
    let ld = model.log_density_fn();
    let scales = model.sample_scale(theta);

    let score = |x: &[f64], k: usize| -> f64 {
        let mut tp = theta.to_vec();
        tp[k] = theta[k] + dh[k];
        let up = ld(x, &tp);
        tp[k] = theta[k] - dh[k];
        let dn = ld(x, &tp);
        (up - dn) / (2.0 * dh[k])
    };

    let entry = |mu: usize, nu: usize, opts: &QuadOptions| {
        integrate_sample_space(
            model.sample_space(),
            &scales,
            |x| {
                let lp = ld(x, theta);
                if lp == f64::NEG_INFINITY {
                    return 0.0;
                }
                let p = lp.exp();
                if p == 0.0 {
                    return 0.0;
                }
                p * score(x, mu) * score(x, nu)
            },
            opts,
            "score covariance",
        )
    };

    // Difference scores carry roundoff of order ε/h, so vanishing off-diagonal
    // entries get an absolute floor tied to the diagonal scale.
    let mut g = MetricMatrix::zeros(n);
    for mu in 0..n {
        g[(mu, mu)] = entry(mu, mu, &SCORE_QUAD)?;
    }
    for mu in 0..n {
        for nu in (mu + 1)..n {
            let floor = 1e-10 * (g[(mu, mu)] * g[(nu, nu)]).sqrt();
            let opts = QuadOptions {
                abs_tol: floor,
                ..SCORE_QUAD
            };
            let v = entry(mu, nu, &opts)?;
            g[(mu, nu)] = v;
            g[(nu, mu)] = v;
        }
    }
    Ok(g)
}
