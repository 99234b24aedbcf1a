use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use igeflow::geodesic::{integrate_geodesic, GeodesicError, GeodesicOptions, GeodesicPath};
use igeflow::geometry::GeometryError;
use igeflow::ige::{
    estimate_kig, ige_series, kig_running, normalize_complexity, IgeError, IgeSeries,
    SeriesOptions,
};
use igeflow::models::{ModelError, StatisticalModel};
use igeflow::Execution;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, ExperimentConfig};
use crate::format::g12;
use crate::report::{Artifacts, Failure, RunReport, Stage, StageReport, StageStatus, SummaryJson};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for the artifacts; the config's output stem keeps only its
    /// file name when set.
    pub out_dir: Option<PathBuf>,
    pub execution: Execution,
}

pub const CSV_HEADER: &str = "tau,vol,avg_vol,ige,increment,kig_running";

/// Hex SHA-256 of the canonical JSON form of the config.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn config_error_code(e: &ConfigError) -> &'static str {
    match e {
        ConfigError::Io { .. } => "CONFIG_READ",
        ConfigError::Parse { .. } => "CONFIG_PARSE",
        ConfigError::Invalid(_) => "CONFIG_INVALID",
    }
}

fn model_code(e: &ModelError) -> &'static str {
    match e {
        ModelError::OutsideDomain { .. } | ModelError::TooCloseToBoundary { .. } => "OUTSIDE_DOMAIN",
        ModelError::QuadratureNotConverged { .. } | ModelError::Numerics { .. } => "QUADRATURE_FAILED",
        ModelError::IndefiniteMetric { .. } => "INDEFINITE_METRIC",
        _ => "MODEL_ERROR",
    }
}

fn geometry_code(e: &GeometryError) -> &'static str {
    match e {
        GeometryError::Model(m) => model_code(m),
        GeometryError::NotPositiveDefinite { .. } => "INDEFINITE_METRIC",
    }
}

fn geodesic_code(e: &GeodesicError) -> &'static str {
    match e {
        GeodesicError::Geometry(g) => geometry_code(g),
        GeodesicError::DegenerateAxis { .. } => "DEGENERATE_AXIS",
        GeodesicError::TauOutOfRange { .. } => "GEODESIC_TRUNCATED",
        GeodesicError::ZeroVelocity | GeodesicError::VelocityDimension { .. } => "INVALID_VELOCITY",
        GeodesicError::InvalidDuration(_) | GeodesicError::Integration(_) => "GEODESIC_FAILED",
    }
}

pub fn ige_code(e: &IgeError) -> &'static str {
    match e.root() {
        IgeError::Geodesic(g) => geodesic_code(g),
        IgeError::Geometry(g) => geometry_code(g),
        IgeError::BoxOutsideDomain { .. } => "OUTSIDE_DOMAIN",
        IgeError::Quadrature { .. } | IgeError::QuadratureNotConverged { .. } => "QUADRATURE_FAILED",
        IgeError::TooShort { .. } | IgeError::InvalidFit(_) => "FIT_FAILED",
        IgeError::InvalidReference(_) => "NORMALIZATION_INVALID",
        _ => "SERIES_INVALID",
    }
}

struct Stages {
    done: Vec<StageReport>,
}

impl Stages {
    fn time<T, E>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T, E>) -> Result<T, E> {
        let start = Instant::now();
        let out = f();
        self.done.push(StageReport {
            stage,
            status: if out.is_ok() { StageStatus::Ok } else { StageStatus::Failed },
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn finish(mut self) -> Vec<StageReport> {
        for stage in Stage::ALL {
            if !self.done.iter().any(|s| s.stage == stage) {
                self.done.push(StageReport {
                    stage,
                    status: StageStatus::Skipped,
                    wall_seconds: 0.0,
                });
            }
        }
        self.done
    }
}

fn stem_path(config: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    let stem = Path::new(&config.output);
    match &opts.out_dir {
        Some(dir) => dir.join(stem.file_name().unwrap_or(stem.as_os_str())),
        None => stem.to_path_buf(),
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = with_suffix(path, &format!(".tmp{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

/// The CSV for a finished series. Missing values are written as `nan`.
pub fn series_csv(series: &IgeSeries, window_fraction: f64) -> String {
    let running = kig_running(series, window_fraction);
    let opt = |v: Option<f64>| g12(v.unwrap_or(f64::NAN));
    let mut out = String::with_capacity(series.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g12(series.taus[i]),
            g12(series.vol[i]),
            g12(series.avg_vol[i]),
            g12(series.ige[i]),
            opt(series.increments[i]),
            opt(running[i]),
        );
    }
    out
}

fn failure(code: &'static str, stage: Stage, detail: impl ToString) -> Failure {
    Failure {
        code,
        stage,
        detail: detail.to_string(),
    }
}

struct Outcome {
    model: Option<String>,
    exit: Option<String>,
    series: Option<(IgeSeries, igeflow::ige::IgeSummary)>,
}

fn pipeline(
    config: &ExperimentConfig,
    opts: &RunOptions,
    stages: &mut Stages,
    outcome: &mut Outcome,
) -> Result<(), Failure> {
    stages
        .time(Stage::Config, || config.validate().map(|_| ()))
        .map_err(|e| failure(config_error_code(&e), Stage::Config, e))?;
    let model: StatisticalModel = stages
        .time(Stage::Model, || config.validate())
        .map_err(|e| failure("MODEL_ERROR", Stage::Model, e))?;
    outcome.model = Some(model.name().to_string());

    let geo = GeodesicOptions {
        rel_tol: config.tolerances.ode_rel_tol,
        normalize_speed: config.normalize_speed,
        ..GeodesicOptions::default()
    };
    let path: GeodesicPath = stages
        .time(Stage::Geodesic, || {
            let path = integrate_geodesic(&model, &config.theta0, &config.theta_dot0, config.tau_max, &geo)
                .map_err(|e| failure(geodesic_code(&e), Stage::Geodesic, e))?;
            if let Some(exit) = &path.exit {
                outcome.exit = Some(exit.to_string());
                return Err(failure(
                    "GEODESIC_TRUNCATED",
                    Stage::Geodesic,
                    format!("path ends at s = {} before tau_max = {}: {exit}", path.end(), config.tau_max),
                ));
            }
            Ok(path)
        })?;

    let series_opts = SeriesOptions {
        quad_rel_tol: config.tolerances.quad_rel_tol,
        bounds_mode: config.bounds_mode.into(),
        tau_burn: config.tau_burn,
        execution: opts.execution,
    };
    let grid = config.grid();
    let series = stages
        .time(Stage::Volumes, || ige_series(&model, &path, &grid, &series_opts))
        .map_err(|e| failure(ige_code(&e), Stage::Volumes, e))?;

    let (series, summary) = stages
        .time(Stage::Fit, || {
            let series = match &config.normalization {
                Some(n) => normalize_complexity(&series, n.reference_volume)?,
                None => series,
            };
            let summary = estimate_kig(&series, &config.fit.into())?;
            Ok::<_, IgeError>((series, summary))
        })
        .map_err(|e| failure(ige_code(&e), Stage::Fit, e))?;
    outcome.series = Some((series, summary));
    Ok(())
}

/// Run the full pipeline for one config and write its artifacts.
///
/// A summary JSON is written on failure too, as long as the failure is not in
/// writing it. The CSV is only written for completed runs.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> RunReport {
    let mut stages = Stages { done: Vec::new() };
    let mut outcome = Outcome {
        model: None,
        exit: None,
        series: None,
    };
    let mut fail = pipeline(config, opts, &mut stages, &mut outcome).err();

    let stem = stem_path(config, opts);
    let csv_path = with_suffix(&stem, ".csv");
    let summary_path = with_suffix(&stem, ".summary.json");
    let mut report = RunReport {
        config: config.clone(),
        config_hash: config_hash(config),
        model: outcome.model,
        status: "ok",
        failure: None,
        geodesic_exit: outcome.exit,
        summary: outcome.series.as_ref().map(|(_, s)| SummaryJson::from(s)),
        ige_summary: outcome.series.as_ref().map(|(_, s)| s.clone()),
        stages: Vec::new(),
        artifacts: None,
    };

    if fail.is_none() {
        let (series, _) = outcome.series.as_ref().expect("pipeline succeeded");
        let csv = series_csv(series, config.fit.window_fraction);
        if let Err(e) = stages.time(Stage::Output, || write_atomic(&csv_path, &csv)) {
            fail = Some(failure("IO_ERROR", Stage::Output, format!("{}: {e}", csv_path.display())));
        }
    }
    report.artifacts = Some(Artifacts {
        csv: fail.is_none().then(|| csv_path.display().to_string()),
        summary: summary_path.display().to_string(),
    });
    if let Some(f) = fail {
        report.status = "failed";
        report.failure = Some(f);
    }
    report.stages = stages.finish();
    if let Err(e) = write_atomic(&summary_path, &report.to_json()) {
        report.status = "failed";
        report.failure.get_or_insert(failure(
            "IO_ERROR",
            Stage::Output,
            format!("{}: {e}", summary_path.display()),
        ));
    }
    report
}
