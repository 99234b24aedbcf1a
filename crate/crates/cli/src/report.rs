use igeflow::ige::IgeSummary;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Model,
    Geodesic,
    Volumes,
    Fit,
    Output,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Config,
        Stage::Model,
        Stage::Geodesic,
        Stage::Volumes,
        Stage::Fit,
        Stage::Output,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Model => "model",
            Stage::Geodesic => "geodesic",
            Stage::Volumes => "volumes",
            Stage::Fit => "fit",
            Stage::Output => "output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub status: StageStatus,
    pub wall_seconds: f64,
}

/// Machine-readable failure: a stable code plus human detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub code: &'static str,
    pub stage: Stage,
    pub detail: String,
}

impl Failure {
    /// The single line printed on stderr.
    pub fn line(&self) -> String {
        let detail = self.detail.replace(['\n', '\r'], " ");
        format!(
            "error code={} stage={} detail={:?}",
            self.code,
            self.stage.as_str(),
            detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryJson {
    pub kig: f64,
    pub kig_stderr: f64,
    pub fit_window: [f64; 2],
    pub fit_points: usize,
    pub r_squared: f64,
    pub slope_drift: f64,
    pub regime: String,
    pub step_avg_increment: f64,
    pub normalized: bool,
}

impl From<&IgeSummary> for SummaryJson {
    fn from(s: &IgeSummary) -> Self {
        Self {
            kig: s.kig,
            kig_stderr: s.kig_stderr,
            fit_window: [s.fit_window.0, s.fit_window.1],
            fit_points: s.fit_points,
            r_squared: s.r_squared,
            slope_drift: s.slope_drift,
            regime: s.regime.as_str().to_string(),
            step_avg_increment: s.step_avg_increment,
            normalized: s.normalized,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifacts {
    pub csv: Option<String>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub model: Option<String>,
    pub status: &'static str,
    pub failure: Option<Failure>,
    pub geodesic_exit: Option<String>,
    pub summary: Option<SummaryJson>,
    #[serde(skip)]
    pub ige_summary: Option<IgeSummary>,
    pub stages: Vec<StageReport>,
    pub artifacts: Option<Artifacts>,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
