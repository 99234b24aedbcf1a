use crate::geodesic::{bounds_at_with, BoundsMode, GeodesicPath};
use crate::models::StatisticalModel;
use crate::Execution;

use super::average::increment_unchecked;
use super::volume::instantaneous_volume;
use super::IgeError;

#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    pub quad_rel_tol: f64,
    pub bounds_mode: BoundsMode,
    /// Averaging origin. At 0 the region is empty and contributes zero
    /// volume; otherwise the volume at `tau_burn` is computed.
    pub tau_burn: f64,
    pub execution: Execution,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            quad_rel_tol: 1e-6,
            bounds_mode: BoundsMode::Endpoint,
            tau_burn: 0.0,
            execution: Execution::default(),
        }
    }
}

/// `vol`, `ṽol`, `S = log ṽol` and relative increments on a grid of `τ′`.
///
/// `origin` is the averaging origin `(τ₀, vol(τ₀))`; it is not itself a row of
/// the series. `increments[i]` compares cell `[τ_{i−1}, τ_i]` with the cell
/// before it, so the first row has none.
#[derive(Debug, Clone, PartialEq)]
pub struct IgeSeries {
    pub origin: (f64, f64),
    pub taus: Vec<f64>,
    pub vol: Vec<f64>,
    pub avg_vol: Vec<f64>,
    pub ige: Vec<f64>,
    pub increments: Vec<Option<f64>>,
    pub normalized: bool,
}

impl IgeSeries {
    /// Build the series from sampled volumes.
    pub fn from_volumes(taus: &[f64], vol: &[f64], origin: (f64, f64)) -> Result<Self, IgeError> {
        if taus.is_empty() || taus.len() != vol.len() {
            return Err(IgeError::InvalidSeries(format!(
                "{} grid points and {} volumes",
                taus.len(),
                vol.len()
            )));
        }
        let (t0, v0) = origin;
        if !t0.is_finite() || !(v0 >= 0.0) || !v0.is_finite() {
            return Err(IgeError::InvalidSeries(format!("invalid origin ({t0}, {v0})")));
        }
        let mut prev = t0;
        for &t in taus {
            if !(t > prev) || !t.is_finite() {
                return Err(IgeError::InvalidSeries(format!(
                    "grid must increase strictly from the origin {t0}; found {t} after {prev}"
                )));
            }
            prev = t;
        }
        for (index, &value) in vol.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(IgeError::InvalidVolume { index, value });
            }
        }

        let n = taus.len();
        let mut avg_vol = Vec::with_capacity(n);
        let mut ige = Vec::with_capacity(n);
        let (mut acc, mut t_prev, mut v_prev) = (0.0, t0, v0);
        for i in 0..n {
            acc += 0.5 * (v_prev + vol[i]) * (taus[i] - t_prev);
            let avg = acc / (taus[i] - t0);
            avg_vol.push(avg);
            ige.push(avg.ln());
            t_prev = taus[i];
            v_prev = vol[i];
        }

        let mut full = Vec::with_capacity(n + 1);
        full.push(v0);
        full.extend_from_slice(vol);
        let mut increments = vec![None];
        for j in 2..=n {
            increments.push(Some(increment_unchecked(&full, j - 1)?));
        }

        Ok(Self {
            origin,
            taus: taus.to_vec(),
            vol: vol.to_vec(),
            avg_vol,
            ige,
            increments,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Grid including the origin, as used by the window operations.
    pub fn full_grid(&self) -> (Vec<f64>, Vec<f64>) {
        let mut t = vec![self.origin.0];
        t.extend_from_slice(&self.taus);
        let mut v = vec![self.origin.1];
        v.extend_from_slice(&self.vol);
        (t, v)
    }
}

/// Run the volume pipeline along `path` at every grid point.
///
/// Volumes are independent and evaluated with `opts.execution`; the series is
/// assembled in grid order afterwards, so the result does not depend on the
/// evaluation order.
pub fn ige_series(
    model: &StatisticalModel,
    path: &GeodesicPath,
    grid: &[f64],
    opts: &SeriesOptions,
) -> Result<IgeSeries, IgeError> {
    if grid.is_empty() {
        return Err(IgeError::InvalidSeries("empty grid".into()));
    }
    let t0 = opts.tau_burn;
    if !(t0 >= 0.0) || !t0.is_finite() {
        return Err(IgeError::InvalidSeries(format!("tau_burn must be ≥ 0, got {t0}")));
    }
    if let Some(&bad) = grid.iter().find(|&&t| !(t > t0)) {
        return Err(IgeError::InvalidSeries(format!(
            "grid point {bad} is not after the averaging origin {t0}"
        )));
    }

    let volume_at = |tau: &f64| -> Result<f64, IgeError> {
        let tau = *tau;
        bounds_at_with(path, tau, opts.bounds_mode)
            .map_err(IgeError::from)
            .and_then(|b| instantaneous_volume(model, &b, opts.quad_rel_tol))
            .map_err(|e| IgeError::AtTau {
                tau,
                source: Box::new(e),
            })
    };

    let v0 = if t0 == 0.0 { 0.0 } else { volume_at(&t0)? };
    let vol = opts
        .execution
        .map(grid, volume_at)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    IgeSeries::from_volumes(grid, &vol, (t0, v0))
}

/// Divide `ṽol` by `reference_volume`, making it dimensionless; `S` shifts by
/// `−log reference_volume` and the increments are unchanged.
pub fn normalize_complexity(series: &IgeSeries, reference_volume: f64) -> Result<IgeSeries, IgeError> {
    if !(reference_volume > 0.0) || !reference_volume.is_finite() {
        return Err(IgeError::InvalidReference(reference_volume));
    }
    let shift = reference_volume.ln();
    let mut out = series.clone();
    for (a, s) in out.avg_vol.iter_mut().zip(out.ige.iter_mut()) {
        *a /= reference_volume;
        *s -= shift;
    }
    out.normalized = true;
    Ok(out)
}
