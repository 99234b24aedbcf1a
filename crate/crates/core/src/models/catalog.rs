use std::sync::Arc;

use crate::numerics::{Interval, MetricMatrix};

use super::{ModelError, ParameterDomain, SampleSpace, StatisticalModel};

/// Fixed catalog names. `gaussian_product_<k>` is accepted for any `k ≥ 1`.
pub const CATALOG_NAMES: &[&str] = &[
    "gaussian_1d",
    "gaussian_product_<k>",
    "gaussian_mean_only",
    "exponential_rate",
    "bernoulli",
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Look up a model by name.
pub fn catalog(name: &str) -> Result<StatisticalModel, ModelError> {
    match name {
        "gaussian_1d" => Ok(normal("gaussian_1d")),
        "gaussian_mean_only" => Ok(gaussian_mean_only()),
        "exponential_rate" => Ok(exponential_rate()),
        "bernoulli" => Ok(bernoulli()),
        _ => match name
            .strip_prefix("gaussian_product_")
            .and_then(|k| k.parse::<usize>().ok())
        {
            Some(1) => Ok(normal(name)),
            Some(k) if k >= 2 => StatisticalModel::independent_product(
                name,
                (0..k).map(|_| normal("gaussian_1d")).collect(),
            ),
            _ => Err(ModelError::UnknownModel {
                name: name.to_string(),
                available: CATALOG_NAMES.join(", "),
            }),
        },
    }
}

/// One row of the model listing.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub domain: String,
    pub closed_form: bool,
}

/// Listing of the catalog, with `gaussian_product_<k>` expanded for `k = 1..=3`.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let names = [
        "gaussian_1d",
        "gaussian_product_1",
        "gaussian_product_2",
        "gaussian_product_3",
        "gaussian_mean_only",
        "exponential_rate",
        "bernoulli",
    ];
    names
        .iter()
        .map(|n| {
            let m = catalog(n).expect("catalog names resolve");
            CatalogEntry {
                name: m.name().to_string(),
                dim: m.dim(),
                domain: m.domain().to_string(),
                closed_form: m.has_closed_form_metric(),
            }
        })
        .collect()
}

/// Normal with free mean and standard deviation, `Θ = (μ, σ)`.
/// `gaussian_product_<k>` is the independent product of `k` copies.
fn normal(name: &str) -> StatisticalModel {
    let domain = ParameterDomain::new(vec![Interval::real_line(), Interval::above(0.0)]);
    let sample = SampleSpace::Continuous(vec![Interval::real_line()]);
    StatisticalModel::new(
        name,
        domain,
        sample,
        Arc::new(|x: &[f64], th: &[f64]| {
            let z = (x[0] - th[0]) / th[1];
            -th[1].ln() - HALF_LN_2PI - 0.5 * z * z
        }),
        Arc::new(|th: &[f64]| vec![(th[0], th[1])]),
    )
    .with_closed_form_metric(Arc::new(|th: &[f64]| {
        let s2 = th[1] * th[1];
        MetricMatrix::diagonal(&[1.0 / s2, 2.0 / s2])
    }))
    .with_metric_derivatives(Arc::new(|th: &[f64]| {
        let s3 = th[1].powi(3);
        vec![
            MetricMatrix::zeros(2),
            MetricMatrix::diagonal(&[-2.0 / s3, -4.0 / s3]),
        ]
    }))
}

/// Unit-variance normal with free mean; the metric is the constant `[1]`.
fn gaussian_mean_only() -> StatisticalModel {
    let domain = ParameterDomain::new(vec![Interval::real_line()]);
    let sample = SampleSpace::Continuous(vec![Interval::real_line()]);
    StatisticalModel::new(
        "gaussian_mean_only",
        domain,
        sample,
        Arc::new(|x: &[f64], th: &[f64]| {
            let z = x[0] - th[0];
            -HALF_LN_2PI - 0.5 * z * z
        }),
        Arc::new(|th: &[f64]| vec![(th[0], 1.0)]),
    )
    .with_closed_form_metric(Arc::new(|_: &[f64]| MetricMatrix::identity(1)))
    .with_metric_derivatives(Arc::new(|_: &[f64]| vec![MetricMatrix::zeros(1)]))
}

/// `p(x|λ) = λ e^{-λx}` on `x > 0`.
fn exponential_rate() -> StatisticalModel {
    let domain = ParameterDomain::new(vec![Interval::above(0.0)]);
    let sample = SampleSpace::Continuous(vec![Interval::above(0.0)]);
    StatisticalModel::new(
        "exponential_rate",
        domain,
        sample,
        Arc::new(|x: &[f64], th: &[f64]| th[0].ln() - th[0] * x[0]),
        Arc::new(|th: &[f64]| vec![(0.0, 1.0 / th[0])]),
    )
    .with_closed_form_metric(Arc::new(|th: &[f64]| {
        MetricMatrix::diagonal(&[1.0 / (th[0] * th[0])])
    }))
    .with_metric_derivatives(Arc::new(|th: &[f64]| {
        vec![MetricMatrix::diagonal(&[-2.0 / th[0].powi(3)])]
    }))
}

/// `P(X=1) = p`, `P(X=0) = 1-p`.
fn bernoulli() -> StatisticalModel {
    let domain = ParameterDomain::new(vec![Interval::new(0.0, 1.0).expect("valid")]);
    let sample = SampleSpace::Finite(vec![vec![0.0], vec![1.0]]);
    StatisticalModel::new(
        "bernoulli",
        domain,
        sample,
        Arc::new(|x: &[f64], th: &[f64]| {
            if x[0] == 1.0 {
                th[0].ln()
            } else {
                (1.0 - th[0]).ln()
            }
        }),
        Arc::new(|_: &[f64]| Vec::new()),
    )
    .with_closed_form_metric(Arc::new(|th: &[f64]| {
        let p = th[0];
        MetricMatrix::diagonal(&[1.0 / (p * (1.0 - p))])
    }))
    .with_metric_derivatives(Arc::new(|th: &[f64]| {
        let p = th[0];
        let q = p * (1.0 - p);
        vec![MetricMatrix::diagonal(&[-(1.0 - 2.0 * p) / (q * q)])]
    }))
}
