//! Batch driver for entropy experiments: JSON configs in, CSV series and JSON
//! summaries out.

pub mod config;
pub mod format;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use igeflow::models::catalog_entries;

pub use config::{ConfigError, ExperimentConfig, Overrides};
pub use report::{Failure, RunReport};
pub use run::{run_experiment, RunOptions};

/// One row per catalog model: `name | dim | domain | closed-form`.
pub fn list_models() -> String {
    let mut out = String::from("name | dim | domain | metric\n");
    for e in catalog_entries() {
        let metric = if e.closed_form { "closed-form" } else { "numeric" };
        out.push_str(&format!("{} | {} | {} | {}\n", e.name, e.dim, e.domain, metric));
    }
    out
}

/// The config files a `run` argument refers to: the file itself, or every
/// `*.json` directly inside a directory, sorted by name.
pub fn config_paths(arg: &Path) -> std::io::Result<Vec<PathBuf>> {
    if !arg.is_dir() {
        return Ok(vec![arg.to_path_buf()]);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(arg)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .filter(|p| {
            !p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".summary.json"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Worker count from `IGEFLOW_THREADS`; `None` means the rayon default.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("IGEFLOW_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("IGEFLOW_THREADS must be a positive integer, got {v:?}")),
            Ok(n) => Ok(Some(n)),
        },
    }
}
