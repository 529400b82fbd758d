//! `qsflow` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsflow_cli::commands;
use qsflow_cli::config::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "qsflow",
    about = "Pseudo-spectral solver and coefficient-regime analyzer for the \
             incompressible inertial Q-tensor model of nematic liquid crystals",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the coefficient gates and report solution-theory capabilities
    Classify(Common),
    /// Integrate the system; writes diagnostics CSV, final snapshot, manifest
    Run(Common),
    /// Integrate and fit an exponential decay rate to the energy series
    Decay(Common),
    /// Run the oracle verification suite (convolution agreement, form
    /// minimization, gradient checks, cancellation identity)
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat `key = value` lines; `#` comments)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one configuration key, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides out_dir)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Initial-data seed (overrides init_seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn load(common: &Common) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let Some((key, value)) = kv.split_once('=') else {
            return Err(config::ConfigError(format!(
                "--set expects KEY=VALUE, got '{kv}'"
            )));
        };
        cfg.set(key.trim(), value)?;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.init_seed = seed;
    }
    Ok(cfg)
}

fn dispatch(common: &Common, f: impl Fn(&RunConfig) -> u8) -> u8 {
    match load(common) {
        Ok(cfg) => f(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            commands::EXIT_CONFIG
        }
    }
}

fn main() -> ExitCode {
    // QS_THREADS bounds worker parallelism (defaults to all cores).
    if let Ok(v) = std::env::var("QS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: QS_THREADS must be a positive integer (got '{v}')");
                return ExitCode::from(commands::EXIT_CONFIG);
            }
        }
    }
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Classify(common) => dispatch(common, commands::cmd_classify),
        Cmd::Run(common) => dispatch(common, commands::cmd_run),
        Cmd::Decay(common) => dispatch(common, commands::cmd_decay),
        Cmd::Verify(common) => dispatch(common, commands::cmd_verify),
    };
    ExitCode::from(code)
}
