#![allow(dead_code)]

use igeflow::models::StatisticalModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CATALOG: &[&str] = &[
    "gaussian_1d",
    "gaussian_product_2",
    "gaussian_mean_only",
    "exponential_rate",
    "bernoulli",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point comfortably inside the domain.
pub fn interior_point(model: &StatisticalModel, rng: &mut impl Rng) -> Vec<f64> {
    model
        .domain()
        .axes()
        .iter()
        .map(|a| match (a.lo().is_finite(), a.hi().is_finite()) {
            (true, true) => a.lo() + a.width() * rng.gen_range(0.1..0.9),
            (true, false) => a.lo() + rng.gen_range(0.4..3.0),
            (false, true) => a.hi() - rng.gen_range(0.4..3.0),
            (false, false) => rng.gen_range(-2.0..2.0),
        })
        .collect()
}

pub fn uniform_grid(n: usize, t_max: f64) -> Vec<f64> {
    (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
}
