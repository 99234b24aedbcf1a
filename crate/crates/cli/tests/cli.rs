use std::path::Path;
use std::process::Command;

use igeflow::ige::Regime;
use igeflow::Execution;
use igeflow_cli::config::{BoundsModeConfig, FitConfig, ModelSpec, Normalization, Tolerances};
use igeflow_cli::{run_experiment, ExperimentConfig, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_igeflow"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const FLAT: &str = r#"{"model": "gaussian_mean_only", "theta0": [0], "theta_dot0": [1], "tau_max": 100, "output": "flat"}"#;

#[test]
fn list_models_prints_catalog_rows() {
    let out = bin().arg("list-models").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gaussian_1d | 2 | (-inf,inf)x(0,inf) | closed-form"));
    assert!(text.contains("bernoulli | 1 | (0,1) | closed-form"));
}

#[test]
fn flat_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.json", FLAT);
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("flat.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,vol,avg_vol,ige,increment,kig_running"));
    assert_eq!(lines.count(), 200);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("flat.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"]["regime"], "sub-exponential");
    assert!(summary["summary"]["kig"].as_f64().unwrap() < 2e-2);
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(summary["stages"].as_array().unwrap().len(), 6);
    // no temporary files are left behind
    let leftovers = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn vertical_geodesic_fails_with_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "vertical.json",
        r#"{"model": "gaussian_1d", "theta0": [0, 1], "theta_dot0": [0, 1], "tau_max": 2, "output": "vertical"}"#,
    );
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error code=DEGENERATE_AXIS stage=volumes "));
    let summary = std::fs::read_to_string(dir.path().join("vertical.summary.json")).unwrap();
    assert!(summary.contains("\"DEGENERATE_AXIS\""));
    assert!(!dir.path().join("vertical.csv").exists());
}

#[test]
fn invalid_config_is_itemized() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"model": "gaussian_1d", "theta0": [0, 1, 2], "theta_dot0": [1, 0], "tau_max": 2, "grid_points": 3}"#,
    );
    for cmd in ["validate", "run"] {
        let out = bin().args([cmd, cfg.to_str().unwrap()]).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.lines().next().unwrap().starts_with("error code=CONFIG_INVALID stage=config"));
        assert!(err.contains("theta0: expected 2, got 3"));
        assert!(err.contains("grid_points: must be at least 10"));
    }
    let garbage = write(dir.path(), "garbage.json", "{ not json");
    let out = bin().args(["validate", garbage.to_str().unwrap()]).output().unwrap();
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error code=CONFIG_PARSE"));
}

#[test]
fn flags_override_and_directories_run_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = dir.path().join("cfgs");
    std::fs::create_dir(&cfgs).unwrap();
    write(&cfgs, "a.json", FLAT);
    write(&cfgs, "b.json", &FLAT.replace("\"flat\"", "\"flat_b\""));
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", cfgs.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .args(["--tau-max", "20", "--grid-points", "40", "--bounds-mode", "envelope"])
        .env("IGEFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read_to_string(out_dir.join("flat.csv")).unwrap();
    let b = std::fs::read_to_string(out_dir.join("flat_b.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 41);
    assert!(a.lines().last().unwrap().starts_with("20,"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.json", FLAT);
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("IGEFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error code=ENV_INVALID"));
}

#[test]
fn normalization_by_half_horizon_zeroes_the_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::from_json(FLAT).unwrap();
    c.normalization = Some(Normalization {
        reference_volume: 50.0,
    });
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        execution: Execution::Sequential,
    };
    let report = run_experiment(&c, &opts);
    assert!(report.succeeded());
    let s = report.ige_summary.unwrap();
    assert!(s.normalized);
    assert_eq!(s.regime, Regime::SubExponential);
    let csv = std::fs::read_to_string(dir.path().join("flat.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert!(last[3].parse::<f64>().unwrap().abs() < 1e-10);
}

#[test]
fn truncated_geodesics_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig::from_json(
        r#"{"model": "bernoulli", "theta0": [0.5], "theta_dot0": [1], "tau_max": 10, "output": "b"}"#,
    )
    .unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    let r = run_experiment(&c, &opts);
    let f = r.failure.clone().unwrap();
    assert_eq!(f.code, "GEODESIC_TRUNCATED");
    assert!(r.geodesic_exit.is_some());
}

fn random_config(r: &mut ChaCha8Rng) -> ExperimentConfig {
    let k = r.gen_range(1..4usize);
    ExperimentConfig {
        model: if r.gen_bool(0.5) {
            ModelSpec::Name("gaussian_1d".into())
        } else {
            ModelSpec::Family {
                name: "gaussian_product".into(),
                k: Some(k),
            }
        },
        theta0: (0..r.gen_range(1..5)).map(|_| r.gen_range(-3.0..3.0)).collect(),
        theta_dot0: (0..r.gen_range(1..5)).map(|_| r.gen_range(-3.0..3.0)).collect(),
        tau_max: r.gen_range(0.1..500.0),
        grid_points: r.gen_range(10..5000),
        tolerances: Tolerances {
            ode_rel_tol: r.gen_range(1e-12..1e-4),
            quad_rel_tol: r.gen_range(1e-12..1e-4),
        },
        fit: FitConfig {
            window_fraction: r.gen_range(0.01..1.0),
            kig_threshold: r.gen_range(0.0..0.1),
            r2_min: r.gen_range(0.5..1.0),
            slope_drift: r.gen_range(0.0..1.0),
        },
        tau_burn: r.gen_range(0.0..1.0),
        bounds_mode: if r.gen_bool(0.5) {
            BoundsModeConfig::Endpoint
        } else {
            BoundsModeConfig::Envelope
        },
        normalization: r.gen_bool(0.5).then(|| Normalization {
            reference_volume: r.gen_range(0.01..100.0),
        }),
        normalize_speed: r.gen_bool(0.5),
        output: format!("run_{}", r.gen_range(0..1000)),
    }
}

#[test]
fn configs_round_trip_field_by_field() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let c = random_config(&mut r);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
