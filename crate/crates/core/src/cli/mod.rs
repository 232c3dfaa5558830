//! Command-line driver.
//!
//! Exit codes: 0 success, 1 numerical non-convergence or failed check,
//! 2 usage, configuration or input error. All randomness comes from `--seed`.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::GaugeError;
pub use config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "gaugeflow", version, about = "Higher-order Yang–Mills functionals on discretized tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Sites per axis.
    #[arg(long = "N")]
    pub n_points: Option<usize>,
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Functional order.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// su2 or su3.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long = "band-limit")]
    pub band_limit: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-readable output on stdout.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity catalog.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated case ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Comma-separated resolutions, default 16,32,64.
        #[arg(long)]
        resolutions: Option<String>,
    },
    /// Minimize a functional from a seeded connection.
    Minimize {
        #[command(flatten)]
        common: Common,
        /// YM, YMn, Y or Z.
        #[arg(long)]
        functional: Option<String>,
        /// Run the grid-continuation ladder over `--resolutions`.
        #[arg(long)]
        ladder: bool,
        #[arg(long)]
        resolutions: Option<String>,
        #[arg(long)]
        momentum: bool,
        #[arg(long = "regauge-every")]
        regauge_every: Option<usize>,
        #[arg(long = "record-every")]
        record_every: Option<usize>,
    },
    /// Coulomb gauge fixing of a connection snapshot.
    Gaugefix {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
    },
    /// Evaluate every functional and diagnostic on a connection snapshot.
    Eval {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
    },
    /// Chern–Weil densities of a snapshot or a seeded connection.
    Chern {
        #[command(flatten)]
        common: Common,
        input: Option<PathBuf>,
    },
}

/// Builds the effective configuration: defaults, then the config file, then flags.
pub fn build_config(common: &Common, extra: &[(&str, Option<String>)]) -> crate::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.load_file(path)?;
    }
    let flags: Vec<(&str, Option<String>)> = vec![
        ("m", common.m.map(|v| v.to_string())),
        ("N", common.n_points.map(|v| v.to_string())),
        ("group", common.group.clone()),
        ("k", common.k.map(|v| v.to_string())),
        ("n", common.n.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
        ("amplitude", common.amplitude.map(|v| v.to_string())),
        ("band-limit", common.band_limit.map(|v| v.to_string())),
        ("tol", common.tol.map(|v| v.to_string())),
        ("max-iter", common.max_iter.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("threads", common.threads.map(|v| v.to_string())),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if common.json {
        cfg.json = true;
    }
    if let (Some(k), Some(g)) = (common.k, &common.group) {
        let gk = if g.eq_ignore_ascii_case("su3") { 3 } else { 2 };
        if k != gk {
            return Err(GaugeError::InvalidArgument(format!("--k {k} contradicts --group {g}")));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(e: &GaugeError) -> u8 {
    match e {
        GaugeError::NonFinite(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
