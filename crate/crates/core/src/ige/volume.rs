use std::cell::RefCell;

use crate::geodesic::GeodesicBounds;
use crate::geometry::GeometryError;
use crate::models::{fisher_metric, StatisticalModel};
use crate::numerics::{integrate_box_with, HyperRectangle, NumericsError, QuadOptions};

use super::IgeError;

/// `vol(τ′) = ∫_{D(τ′)} √det g dⁿΘ` to relative tolerance `rel_tol`.
pub fn instantaneous_volume(
    model: &StatisticalModel,
    bounds: &GeodesicBounds,
    rel_tol: f64,
) -> Result<f64, IgeError> {
    volume_over_box(model, &bounds.rect, rel_tol)
}

/// Riemannian volume of a coordinate box.
///
/// When the model declares independent coordinate blocks the metric is block
/// diagonal with each block depending only on its own coordinates, so the
/// integral factorizes into one lower-dimensional quadrature per block.
pub fn volume_over_box(
    model: &StatisticalModel,
    rect: &HyperRectangle,
    rel_tol: f64,
) -> Result<f64, IgeError> {
    let lo: Vec<f64> = rect.axes().iter().map(|a| a.lo()).collect();
    let hi: Vec<f64> = rect.axes().iter().map(|a| a.hi()).collect();
    for corner in [&lo, &hi] {
        model
            .domain()
            .check(corner)
            .map_err(|source| IgeError::BoxOutsideDomain {
                rect: rect.to_string(),
                source,
            })?;
    }

    let opts = QuadOptions {
        rel_tol,
        abs_tol: 0.0,
        ..QuadOptions::default()
    };
    let center = rect.center();
    let mut total = 1.0;
    for block in model.blocks() {
        let sub = rect
            .select(block)
            .map_err(|source| IgeError::Quadrature {
                rect: rect.to_string(),
                source,
            })?;
        // each block integral only needs the per-block tolerance share
        let block_opts = QuadOptions {
            rel_tol: opts.rel_tol / model.blocks().len() as f64,
            ..opts
        };
        total *= block_volume(model, block, &center, &sub, &block_opts)?;
    }
    Ok(total)
}

fn block_volume(
    model: &StatisticalModel,
    block: &[usize],
    center: &[f64],
    sub: &HyperRectangle,
    opts: &QuadOptions,
) -> Result<f64, IgeError> {
    let failure: RefCell<Option<GeometryError>> = RefCell::new(None);
    let whole = block.len() == model.dim();
    let integrand = |x: &[f64]| -> f64 {
        let mut theta = center.to_vec();
        for (&axis, &v) in block.iter().zip(x) {
            theta[axis] = v;
        }
        let density = fisher_metric(model, &theta)
            .map_err(GeometryError::from)
            .and_then(|g| {
                let g = if whole { g } else { g.principal_block(block) };
                g.cholesky()
                    .map(|c| c.sqrt_det())
                    .map_err(|source| GeometryError::NotPositiveDefinite {
                        theta: theta.clone(),
                        source,
                    })
            });
        match density {
            Ok(d) => d,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_box_with(integrand, sub, opts);
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let result = result.map_err(|source: NumericsError| IgeError::Quadrature {
        rect: sub.to_string(),
        source,
    })?;
    if !result.converged {
        return Err(IgeError::QuadratureNotConverged {
            rect: sub.to_string(),
            value: result.value,
            error: result.error,
        });
    }
    Ok(result.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;
    use std::f64::consts::{E, SQRT_2};

    fn rect(b: &[(f64, f64)]) -> HyperRectangle {
        HyperRectangle::from_bounds(b).unwrap()
    }

    #[test]
    fn volume_examples() {
        let flat = catalog("gaussian_mean_only").unwrap();
        assert!((volume_over_box(&flat, &rect(&[(0.0, 3.0)]), 1e-8).unwrap() - 3.0).abs() < 1e-12);

        let g = catalog("gaussian_1d").unwrap();
        let v = volume_over_box(&g, &rect(&[(0.0, 1.0), (1.0, 2.0)]), 1e-8).unwrap();
        assert!((v - 0.707_106_8).abs() < 1e-6);
        assert!((v - SQRT_2 * 0.5).abs() < 1e-9);
        let v = volume_over_box(&g, &rect(&[(0.0, 1.0), (1.0, E)]), 1e-8).unwrap();
        assert!((v - SQRT_2 * (1.0 - 1.0 / E)).abs() < 1e-6);
        assert!((v - 0.893_953_5).abs() < 1e-6);
    }

    #[test]
    fn product_volume_factorizes() {
        let g2 = catalog("gaussian_product_2").unwrap();
        let r = rect(&[(0.0, 1.0), (1.0, 2.0), (-1.0, 2.0), (0.5, 1.0)]);
        let v = volume_over_box(&g2, &r, 1e-9).unwrap();
        let exact = (SQRT_2 * 0.5) * (3.0 * SQRT_2 * (2.0 - 1.0));
        assert!((v / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bernoulli_volume_is_an_arc() {
        // ∫ dp / √(p(1-p)) = 2 asin √p
        let b = catalog("bernoulli").unwrap();
        let v = volume_over_box(&b, &rect(&[(0.1, 0.6)]), 1e-9).unwrap();
        let exact = 2.0 * (0.6f64.sqrt().asin() - 0.1f64.sqrt().asin());
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn box_must_be_interior() {
        let g = catalog("gaussian_1d").unwrap();
        assert!(matches!(
            volume_over_box(&g, &rect(&[(0.0, 1.0), (-1.0, 2.0)]), 1e-6),
            Err(IgeError::BoxOutsideDomain { .. })
        ));
    }
}
