use igeflow::numerics::{
    det_and_inverse, gauss_legendre_panel, integrate_box, integrate_ode, HyperRectangle,
    MetricMatrix, OdeOptions, OdeState,
};
use proptest::prelude::*;

fn poly2(c: &[f64], x: f64, y: f64) -> f64 {
    // c has 14 coefficients: degree 13 in x times degree ≤ 1 in y
    let mut acc = 0.0;
    for (i, ci) in c.iter().enumerate() {
        acc += ci * x.powi((i % 14) as i32) * if i < 14 { 1.0 } else { y };
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_panel_is_exact_to_degree_13(
        c in prop::collection::vec(-1.0f64..1.0, 14),
        d in prop::collection::vec(-1.0f64..1.0, 14),
        a in -1.0f64..0.0,
        w in 0.2f64..1.0,
    ) {
        let rect = HyperRectangle::from_bounds(&[(a, a + w), (0.0, 1.0)]).unwrap();
        let mut coef = c.clone();
        coef.extend_from_slice(&d);
        let got = gauss_legendre_panel(|p: &[f64]| poly2(&coef, p[0], p[1]), &rect).unwrap();
        // ∫ x^i dx over [a, a+w], times ∫ 1 or ∫ y over [0,1]
        let mut exact = 0.0;
        for (i, ci) in coef.iter().enumerate() {
            let k = (i % 14) as i32 + 1;
            let xi = ((a + w).powi(k) - a.powi(k)) / k as f64;
            exact += ci * xi * if i < 14 { 1.0 } else { 0.5 };
        }
        prop_assert!((got - exact).abs() <= 1e-12, "got {got}, exact {exact}");
    }

    #[test]
    fn quadrature_is_additive(
        lo in -1.0f64..0.0,
        w in 0.5f64..2.0,
        split in 0.1f64..0.9,
        axis in 0usize..2,
        sx in 0.2f64..2.0,
    ) {
        let f = |p: &[f64]| (-(p[0] * p[0]) / sx).exp() * (1.0 + p[1] * p[1]).recip();
        let bounds = [(lo, lo + w), (0.0, 1.5)];
        let whole = HyperRectangle::from_bounds(&bounds).unwrap();
        let mut left = bounds;
        let mut right = bounds;
        let cut = bounds[axis].0 + split * (bounds[axis].1 - bounds[axis].0);
        left[axis].1 = cut;
        right[axis].0 = cut;
        let tol = 1e-9;
        let a = integrate_box(f, &whole, tol).unwrap();
        let l = integrate_box(f, &HyperRectangle::from_bounds(&left).unwrap(), tol).unwrap();
        let r = integrate_box(f, &HyperRectangle::from_bounds(&right).unwrap(), tol).unwrap();
        let combined = tol * (a.value.abs() + l.value.abs() + r.value.abs());
        prop_assert!((a.value - l.value - r.value).abs() <= combined);
    }

    #[test]
    fn det_inverse_is_identity_for_spd(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        n in 1usize..=4,
    ) {
        // B Bᵀ + I is SPD with condition number bounded by the entry range
        let mut b = MetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = entries[i * 4 + j];
            }
        }
        let mut m = b.matmul(&b.transpose());
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let (det, inv) = det_and_inverse(&m).unwrap();
        prop_assert!(det > 0.0);
        let prod = m.matmul(&inv);
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - e).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn harmonic_oscillator_conserves_energy() {
    for tol in [1e-6, 1e-8, 1e-10] {
        let opts = OdeOptions::with_tolerances(tol, tol * 1e-3);
        let path = integrate_ode(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            OdeState::new(0.0, vec![1.0, 0.0]),
            100.0,
            &opts,
        )
        .unwrap();
        assert_eq!(path.last().unwrap().t, 100.0);
        let worst = path
            .iter()
            .map(|s| (s.y[0] * s.y[0] + s.y[1] * s.y[1] - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 10.0 * tol, "tol {tol}: drift {worst}");
    }
}
