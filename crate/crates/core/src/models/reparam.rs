use std::sync::Arc;

use crate::numerics::{Interval, MetricMatrix};

use super::{ModelError, ParameterDomain, StatisticalModel};

type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacobianMap = Arc<dyn Fn(&[f64]) -> MetricMatrix + Send + Sync>;

/// An orientation-preserving change of coordinates `Θ → Θ′`.
///
/// `jacobian` is `∂Θ/∂Θ′` evaluated at the new coordinates `Θ′`, so the metric
/// pulls back as `g′(Θ′) = Jᵀ g(Θ(Θ′)) J`.
#[derive(Clone)]
pub struct Reparametrization {
    pub label: String,
    pub domain: ParameterDomain,
    pub forward: PointMap,
    pub inverse: PointMap,
    pub jacobian: JacobianMap,
}

impl Reparametrization {
    pub fn identity(domain: ParameterDomain) -> Self {
        let n = domain.dim();
        Self {
            label: "identity".into(),
            domain,
            forward: Arc::new(|t: &[f64]| t.to_vec()),
            inverse: Arc::new(|t: &[f64]| t.to_vec()),
            jacobian: Arc::new(move |_: &[f64]| MetricMatrix::identity(n)),
        }
    }

    /// `θᵃ → log θᵃ` on a positive axis `a`; other coordinates unchanged.
    pub fn log_axis(domain: &ParameterDomain, axis: usize) -> Result<Self, ModelError> {
        let iv = domain.axes().get(axis).ok_or_else(|| {
            ModelError::Reparametrization(format!("axis {axis} out of range"))
        })?;
        if iv.lo() != 0.0 || iv.hi() != f64::INFINITY {
            return Err(ModelError::Reparametrization(format!(
                "log map needs axis {axis} to be (0,inf), found {iv}"
            )));
        }
        let mut axes = domain.axes().to_vec();
        axes[axis] = Interval::real_line();
        let n = domain.dim();
        Ok(Self {
            label: format!("log_axis{axis}"),
            domain: ParameterDomain::new(axes),
            forward: Arc::new(move |t: &[f64]| {
                let mut v = t.to_vec();
                v[axis] = v[axis].ln();
                v
            }),
            inverse: Arc::new(move |t: &[f64]| {
                let mut v = t.to_vec();
                v[axis] = v[axis].exp();
                v
            }),
            jacobian: Arc::new(move |t: &[f64]| {
                let mut j = MetricMatrix::identity(n);
                j[(axis, axis)] = t[axis].exp();
                j
            }),
        })
    }
}

/// Sample points per axis used for the round-trip and Jacobian checks.
fn probe_values(iv: &Interval) -> [f64; 3] {
    match (iv.lo().is_finite(), iv.hi().is_finite()) {
        (true, true) => {
            let (a, w) = (iv.lo(), iv.width());
            [a + 0.25 * w, a + 0.5 * w, a + 0.75 * w]
        }
        (true, false) => [iv.lo() + 0.5, iv.lo() + 1.0, iv.lo() + 2.0],
        (false, true) => [iv.hi() - 2.0, iv.hi() - 1.0, iv.hi() - 0.5],
        (false, false) => [-0.7, 0.0, 1.3],
    }
}

/// Express `model` in new coordinates.
///
/// The maps are checked at a few probe points: `forward(inverse(Θ′)) = Θ′`,
/// `inverse(Θ′)` lies in the old domain, `det J > 0`, and `J` agrees with a
/// finite-difference Jacobian of `inverse`.
pub fn reparametrize(
    model: &StatisticalModel,
    map: Reparametrization,
) -> Result<StatisticalModel, ModelError> {
    let n = model.dim();
    if map.domain.dim() != n {
        return Err(ModelError::Reparametrization(format!(
            "new domain has dimension {}, model has {n}",
            map.domain.dim()
        )));
    }

    for probe in 0..3 {
        let p: Vec<f64> = map.domain.axes().iter().map(|a| probe_values(a)[probe]).collect();
        let old = (map.inverse)(&p);
        if old.len() != n || model.domain().check(&old).is_err() {
            return Err(ModelError::Reparametrization(format!(
                "inverse maps {p:?} outside the original domain"
            )));
        }
        let back = (map.forward)(&old);
        for k in 0..n {
            if (back[k] - p[k]).abs() > 1e-9 * p[k].abs().max(1.0) {
                return Err(ModelError::Reparametrization(format!(
                    "forward(inverse({p:?})) = {back:?} does not round-trip"
                )));
            }
        }
        let jac = (map.jacobian)(&p);
        let det = crate::numerics::det_and_inverse(&jac)
            .map(|(d, _)| d)
            .unwrap_or(0.0);
        if !(det > 0.0) {
            return Err(ModelError::Reparametrization(format!(
                "jacobian at {p:?} is not orientation preserving (det = {det})"
            )));
        }
        for col in 0..n {
            let h = 1e-6 * p[col].abs().max(1.0);
            let mut up = p.clone();
            let mut dn = p.clone();
            up[col] += h;
            dn[col] -= h;
            let (fu, fd) = ((map.inverse)(&up), (map.inverse)(&dn));
            for row in 0..n {
                let fdv = (fu[row] - fd[row]) / (2.0 * h);
                let an = jac[(row, col)];
                if (fdv - an).abs() > 1e-5 * an.abs().max(1.0) {
                    return Err(ModelError::Reparametrization(format!(
                        "jacobian entry ({row},{col}) = {an} disagrees with inverse map ({fdv})"
                    )));
                }
            }
        }
    }

    let ld = model.log_density_fn().clone();
    let inv = map.inverse.clone();
    let log_density = Arc::new(move |x: &[f64], t: &[f64]| ld(x, &inv(t)));
    let sc = model.sample_scale_fn().clone();
    let inv = map.inverse.clone();
    let sample_scale = Arc::new(move |t: &[f64]| sc(&inv(t)));

    let mut out = StatisticalModel::new(
        format!("{}[{}]", model.name(), map.label),
        map.domain.clone(),
        model.sample_space().clone(),
        log_density,
        sample_scale,
    );
    if let Some(g) = model.closed_form_metric_fn().cloned() {
        let inv = map.inverse.clone();
        let jac = map.jacobian.clone();
        out = out.with_closed_form_metric(Arc::new(move |t: &[f64]| {
            let mut m = g(&inv(t)).congruence(&jac(t));
            m.symmetrize();
            m
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{catalog, fisher_metric};
    use super::*;

    #[test]
    fn identity_keeps_metric() {
        let m = catalog("gaussian_1d").unwrap();
        let r = reparametrize(&m, Reparametrization::identity(m.domain().clone())).unwrap();
        for p in [[0.0, 1.0], [2.0, 0.3], [-4.0, 9.0]] {
            assert_eq!(fisher_metric(&m, &p).unwrap(), fisher_metric(&r, &p).unwrap());
        }
    }

    #[test]
    fn log_sigma_examples() {
        let m = catalog("gaussian_1d").unwrap();
        let r = reparametrize(&m, Reparametrization::log_axis(m.domain(), 1).unwrap()).unwrap();
        assert_eq!(r.domain().to_string(), "(-inf,inf)x(-inf,inf)");
        let g0 = fisher_metric(&r, &[0.0, 0.0]).unwrap();
        assert!((g0[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((g0[(1, 1)] - 2.0).abs() < 1e-15);
        let g1 = fisher_metric(&r, &[0.0, 1.0]).unwrap();
        assert!((g1[(0, 0)] - (-2.0f64).exp()).abs() < 1e-15);
        assert!((g1[(1, 1)] - 2.0).abs() < 1e-14);
        assert_eq!(g1[(0, 1)], 0.0);
    }

    #[test]
    fn broken_pair_is_rejected() {
        let m = catalog("gaussian_1d").unwrap();
        let mut map = Reparametrization::log_axis(m.domain(), 1).unwrap();
        map.forward = Arc::new(|t: &[f64]| vec![t[0], t[1].ln() + 0.1]);
        assert!(matches!(
            reparametrize(&m, map),
            Err(ModelError::Reparametrization(_))
        ));
    }

    #[test]
    fn wrong_jacobian_is_rejected() {
        let m = catalog("gaussian_1d").unwrap();
        let mut map = Reparametrization::log_axis(m.domain(), 1).unwrap();
        map.jacobian = Arc::new(|_: &[f64]| MetricMatrix::identity(2));
        assert!(reparametrize(&m, map).is_err());
    }

    #[test]
    fn log_map_needs_positive_axis() {
        let m = catalog("gaussian_1d").unwrap();
        assert!(Reparametrization::log_axis(m.domain(), 0).is_err());
    }
}
