use super::IgeError;

fn check_grid(taus: &[f64], vol: &[f64]) -> Result<(), IgeError> {
    if taus.len() != vol.len() {
        return Err(IgeError::InvalidSeries(format!(
            "{} grid points but {} volumes",
            taus.len(),
            vol.len()
        )));
    }
    if taus.len() < 2 {
        return Err(IgeError::InvalidSeries("need at least two grid points".into()));
    }
    if !taus.iter().all(|t| t.is_finite()) || taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(IgeError::InvalidSeries("grid must be finite and strictly increasing".into()));
    }
    for (index, &value) in vol.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(IgeError::InvalidVolume { index, value });
        }
    }
    Ok(())
}

/// Linear interpolation of `vol` at `tau` inside the grid, with the cell index.
fn locate(taus: &[f64], vol: &[f64], tau: f64) -> (usize, f64) {
    let i = taus.partition_point(|&t| t <= tau).clamp(1, taus.len() - 1) - 1;
    let w = (tau - taus[i]) / (taus[i + 1] - taus[i]);
    (i, vol[i] + w * (vol[i + 1] - vol[i]))
}

/// `∫_{lo}^{hi} vol dτ′` by the trapezoid rule, assuming a validated grid.
fn trapezoid(taus: &[f64], vol: &[f64], lo: f64, hi: f64) -> f64 {
    let (i, v_lo) = locate(taus, vol, lo);
    let (j, v_hi) = locate(taus, vol, hi);
    if i == j {
        return 0.5 * (v_lo + v_hi) * (hi - lo);
    }
    let mut acc = 0.5 * (v_lo + vol[i + 1]) * (taus[i + 1] - lo);
    for c in i + 1..j {
        acc += 0.5 * (vol[c] + vol[c + 1]) * (taus[c + 1] - taus[c]);
    }
    acc + 0.5 * (vol[j] + v_hi) * (hi - taus[j])
}

/// `(1/(τ_M − τ_m)) ∫_{τ_m}^{τ_M} vol dτ′`, piecewise linear between samples.
pub fn windowed_avg_volume(
    taus: &[f64],
    vol: &[f64],
    tau_m: f64,
    tau_big_m: f64,
) -> Result<f64, IgeError> {
    check_grid(taus, vol)?;
    if !(tau_big_m > tau_m) {
        return Err(IgeError::EmptyWindow {
            lo: tau_m,
            hi: tau_big_m,
        });
    }
    let (lo, hi) = (taus[0], taus[taus.len() - 1]);
    for tau in [tau_m, tau_big_m] {
        if !(tau >= lo && tau <= hi) {
            return Err(IgeError::OutsideGrid { tau, lo, hi });
        }
    }
    Ok(trapezoid(taus, vol, tau_m, tau_big_m) / (tau_big_m - tau_m))
}

/// Running temporal average `ṽol(τ) = (1/(τ − τ₀)) ∫_{τ₀}^{τ} vol dτ′` with the
/// averaging origin `τ₀ = taus[0]`.
pub fn averaged_volume(taus: &[f64], vol: &[f64], tau: f64) -> Result<f64, IgeError> {
    check_grid(taus, vol)?;
    if tau == taus[0] {
        return Err(IgeError::EmptyWindow { lo: tau, hi: tau });
    }
    windowed_avg_volume(taus, vol, taus[0], tau)
}

/// `(W_{k,k+1} − W_{k−1,k}) / W_{k−1,k}` where `W_{i,i+1}` is the average over
/// grid cell `[τ_i, τ_{i+1}]`.
pub fn relative_increment(taus: &[f64], vol: &[f64], k: usize) -> Result<f64, IgeError> {
    check_grid(taus, vol)?;
    if k == 0 || k + 1 >= taus.len() {
        return Err(IgeError::InvalidSeries(format!(
            "window {k} needs cells on both sides (grid has {} points)",
            taus.len()
        )));
    }
    Ok(increment_unchecked(vol, k)?)
}

/// On a cell, the trapezoid average is the mean of the two end values.
pub(super) fn increment_unchecked(vol: &[f64], k: usize) -> Result<f64, IgeError> {
    let before = 0.5 * (vol[k - 1] + vol[k]);
    let after = 0.5 * (vol[k] + vol[k + 1]);
    if before == 0.0 {
        return Err(IgeError::ZeroDenominator { k });
    }
    Ok((after - before) / before)
}

/// Mean of [`relative_increment`] over every interior window `k = 1..len−1`.
pub fn step_averaged_increment(taus: &[f64], vol: &[f64]) -> Result<f64, IgeError> {
    check_grid(taus, vol)?;
    if taus.len() < 3 {
        return Err(IgeError::InvalidSeries("need at least two windows".into()));
    }
    let mut acc = 0.0;
    for k in 1..taus.len() - 1 {
        acc += increment_unchecked(vol, k)?;
    }
    Ok(acc / (taus.len() - 2) as f64)
}
