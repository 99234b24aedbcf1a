use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use igeflow::Execution;
use igeflow_cli::config::BoundsModeConfig;
use igeflow_cli::run::config_error_code;
use igeflow_cli::{
    config_paths, list_models, run_experiment, threads_from_env, ExperimentConfig, Overrides,
    RunOptions, RunReport,
};
use rayon::prelude::*;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUN: u8 = 3;

#[derive(Parser)]
#[command(name = "igeflow", version, about = "Information geometric entropy of geodesic flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one config file, or every *.json in a directory.
    Run {
        config: PathBuf,
        /// Directory for the CSV and summary files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        /// endpoint | envelope
        #[arg(long)]
        bounds_mode: Option<BoundsModeConfig>,
        #[arg(long)]
        tau_burn: Option<f64>,
    },
    /// Print the model catalog.
    ListModels,
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn config_failure(path: &Path, e: &igeflow_cli::ConfigError) -> ExitCode {
    eprintln!(
        "error code={} stage=config detail={:?}",
        config_error_code(e),
        format!("{}: {e}", path.display())
    );
    if let igeflow_cli::ConfigError::Invalid(items) = e {
        for item in items {
            eprintln!("  {item}");
        }
    }
    ExitCode::from(EXIT_CONFIG)
}

fn print_report(path: &Path, r: &RunReport) {
    match (&r.failure, &r.summary) {
        (None, Some(s)) => println!(
            "{}: kig={} ± {} regime={} window=[{}, {}] -> {}",
            path.display(),
            s.kig,
            s.kig_stderr,
            s.regime,
            s.fit_window[0],
            s.fit_window[1],
            r.artifacts.as_ref().and_then(|a| a.csv.clone()).unwrap_or_default(),
        ),
        (Some(f), _) => eprintln!("{}", f.line()),
        (None, None) => unreachable!("successful runs carry a summary"),
    }
}

fn run(config: &Path, out: Option<PathBuf>, overrides: Overrides) -> ExitCode {
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error code=ENV_INVALID stage=config detail={e:?}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error code=ENV_INVALID stage=config detail={:?}", e.to_string());
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let paths = match config_paths(config) {
        Ok(p) if !p.is_empty() => p,
        Ok(_) => {
            eprintln!("error code=CONFIG_READ stage=config detail={:?}", format!("no *.json in {}", config.display()));
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error code=CONFIG_READ stage=config detail={:?}", format!("{}: {e}", config.display()));
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let mut configs = Vec::with_capacity(paths.len());
    for p in &paths {
        match ExperimentConfig::load(p) {
            Ok(mut c) => {
                c.apply(&overrides);
                configs.push(c);
            }
            Err(e) => return config_failure(p, &e),
        }
    }
    for (p, c) in paths.iter().zip(&configs) {
        if let Err(e) = c.validate() {
            return config_failure(p, &e);
        }
    }

    let opts = RunOptions {
        out_dir: out,
        execution: Execution::Parallel,
    };
    let reports: Vec<RunReport> =
        pool.install(|| configs.par_iter().map(|c| run_experiment(c, &opts)).collect());

    let mut ok = true;
    for (p, r) in paths.iter().zip(&reports) {
        print_report(p, r);
        ok &= r.succeeded();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUN)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListModels => {
            print!("{}", list_models());
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config).and_then(|c| c.validate().map(|m| (c, m))) {
            Ok((c, m)) => {
                println!(
                    "{}: ok (model {}, dim {}, {} grid points to tau = {})",
                    config.display(),
                    m.name(),
                    m.dim(),
                    c.grid_points,
                    c.tau_max
                );
                ExitCode::SUCCESS
            }
            Err(e) => config_failure(&config, &e),
        },
        Command::Run {
            config,
            out,
            tau_max,
            grid_points,
            bounds_mode,
            tau_burn,
        } => run(
            &config,
            out,
            Overrides {
                tau_max,
                grid_points,
                bounds_mode,
                tau_burn,
            },
        ),
    }
}
