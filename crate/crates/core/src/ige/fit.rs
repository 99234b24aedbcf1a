use super::{step_averaged_increment, IgeError, IgeSeries};

/// Minimum number of points in the tail fit.
pub const MIN_FIT_POINTS: usize = 10;
const MIN_RUNNING_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Fraction of the τ range, counted back from the end, used for the fit.
    pub window_fraction: f64,
    pub kig_threshold: f64,
    /// Minimum coefficient of determination for the exponential regime.
    pub r2_min: f64,
    /// Largest allowed difference between the slopes of the two halves of the
    /// fit window, relative to the full-window slope. A straight IGE has equal
    /// halves; a logarithmic one does not, however good its overall R² is.
    pub slope_drift: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window_fraction: 0.5,
            kig_threshold: 1e-2,
            r2_min: 0.99,
            slope_drift: 0.1,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<(), IgeError> {
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(IgeError::InvalidFit(format!(
                "window_fraction must be in (0, 1], got {}",
                self.window_fraction
            )));
        }
        if !self.kig_threshold.is_finite() || !(0.0..=1.0).contains(&self.r2_min) {
            return Err(IgeError::InvalidFit("kig_threshold or r2_min out of range".into()));
        }
        if !(self.slope_drift >= 0.0) {
            return Err(IgeError::InvalidFit("slope_drift must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ExponentialVolumeGrowth,
    SubExponential,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::ExponentialVolumeGrowth => "exponential-volume-growth",
            Regime::SubExponential => "sub-exponential",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ a + b x` on centred data. Needs two distinct x.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    // a constant response is fitted perfectly by a zero slope
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).max(0.0) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgeSummary {
    pub kig: f64,
    pub kig_stderr: f64,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
    pub r_squared: f64,
    /// `|slope(second half) − slope(first half)| / |kig|` over the fit window.
    pub slope_drift: f64,
    pub regime: Regime,
    pub step_avg_increment: f64,
    pub normalized: bool,
}

fn tail_start(taus: &[f64], origin: f64, upto: usize, fraction: f64) -> usize {
    let end = taus[upto];
    let cut = end - fraction * (end - origin);
    taus[..=upto].partition_point(|&t| t < cut)
}

/// Fit `S(τ)` over the tail window and classify the growth regime.
///
/// The regime is exponential volume growth when the slope exceeds the
/// threshold, the fit explains at least `r2_min` of the variance, and the two
/// halves of the window agree on the slope to within `slope_drift`.
pub fn estimate_kig(series: &IgeSeries, opts: &FitOptions) -> Result<IgeSummary, IgeError> {
    opts.validate()?;
    if series.is_empty() {
        return Err(IgeError::TooShort {
            needed: MIN_FIT_POINTS,
            got: 0,
        });
    }
    let last = series.len() - 1;
    let start = tail_start(&series.taus, series.origin.0, last, opts.window_fraction);
    let (x, y) = (&series.taus[start..], &series.ige[start..]);
    if x.len() < MIN_FIT_POINTS {
        return Err(IgeError::TooShort {
            needed: MIN_FIT_POINTS,
            got: x.len(),
        });
    }
    let fit = ols(x, y).expect("at least ten increasing points");
    let half = x.len() / 2;
    let first = ols(&x[..half], &y[..half]).expect("half window has ≥ 5 points");
    let second = ols(&x[half..], &y[half..]).expect("half window has ≥ 5 points");
    let drift_abs = (second.slope - first.slope).abs();
    let slope_drift = if fit.slope != 0.0 {
        drift_abs / fit.slope.abs()
    } else if drift_abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };

    let regime = if fit.slope > opts.kig_threshold
        && fit.r_squared >= opts.r2_min
        && slope_drift <= opts.slope_drift
    {
        Regime::ExponentialVolumeGrowth
    } else {
        Regime::SubExponential
    };

    let (t, v) = series.full_grid();
    let step_avg_increment = step_averaged_increment(&t, &v)?;

    Ok(IgeSummary {
        kig: fit.slope,
        kig_stderr: fit.slope_stderr,
        fit_window: (x[0], x[x.len() - 1]),
        fit_points: x.len(),
        r_squared: fit.r_squared,
        slope_drift,
        regime,
        step_avg_increment,
        normalized: series.normalized,
    })
}

/// Tail-fit slope of `S` using only the rows up to each `τ_i`, with the same
/// window fraction; `None` until the window holds three points.
pub fn kig_running(series: &IgeSeries, window_fraction: f64) -> Vec<Option<f64>> {
    (0..series.len())
        .map(|i| {
            let start = tail_start(&series.taus, series.origin.0, i, window_fraction);
            if i + 1 - start < MIN_RUNNING_POINTS {
                return None;
            }
            ols(&series.taus[start..=i], &series.ige[start..=i]).map(|f| f.slope)
        })
        .collect()
}
