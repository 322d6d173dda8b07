//! `dualrail`: simulations of dual-rail state transfer through spin chains.
//!
//! Exit status: 0 success, 1 I/O or internal error, 2 invalid input,
//! 3 failure target not reached, 4 conformance failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Invalid, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dualrail", version, about = "Dual-rail quantum state transfer through spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Sites per chain.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Coupling J in kelvin; enables nanosecond columns and physical rates.
    #[arg(long, global = true)]
    pub j_kelvin: Option<f64>,
    /// Anisotropy Δ (1 is the isotropic Heisenberg chain).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Uniform field B in units of J.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b_field: Option<f64>,
    /// Symmetric damping rate in natural units.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Symmetric damping rate in 1/ns.
    #[arg(long, global = true)]
    pub gamma_ns: Option<f64>,
    /// Damping of rail 1 in 1/ns.
    #[arg(long, global = true)]
    pub gamma1_ns: Option<f64>,
    /// Damping of rail 2 in 1/ns.
    #[arg(long, global = true)]
    pub gamma2_ns: Option<f64>,
    /// Number of measurements.
    #[arg(long, global = true)]
    pub l_max: Option<usize>,
    /// `greedy`, `uniform`, or a path to a JSON array of intervals.
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    /// Stop once the joint failure probability is at or below this.
    #[arg(long, global = true)]
    pub p_target: Option<f64>,
    /// Upper bound on measurements when chasing a target.
    #[arg(long, global = true)]
    pub l_cap: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Figure number (2, 3 or 4).
    #[arg(long, global = true)]
    pub fig: Option<u32>,
    /// End of the amplitude time grid (natural units).
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Step of the amplitude time grid.
    #[arg(long, global = true)]
    pub t_step: Option<f64>,
    /// Chain lengths for sweeps, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_values: Vec<usize>,
    /// Failure targets for sweeps, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p_values: Vec<f64>,
    /// J/Γ values in K·ns for the damped sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub j_over_gamma: Vec<f64>,
    /// Interval search window `LO,HI` in natural units.
    #[arg(long, global = true, value_delimiter = ',', value_name = "LO,HI")]
    pub window: Vec<f64>,
    /// Grid spacing of the interval search.
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Peak,
    Time,
    SelfTest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// |f_{N,1}(t)|² on a time grid.
    Amplitude,
    /// Runs the measurement protocol on a schedule.
    Protocol,
    /// Builds a greedy schedule, optionally until a failure target.
    Optimize,
    /// Power-law fits of the peak height or the transfer time.
    Fit {
        #[arg(long, value_enum, default_value_t = FitKind::Peak)]
        kind: FitKind,
    },
    /// Regenerates a figure dataset.
    Figure,
    /// Compares the reduced model with the full-space simulation.
    OracleCheck {
        /// Flips the reduced hopping sign to confirm the checks notice.
        #[arg(long)]
        inject_sign_error: bool,
        /// Skips the long asymmetric-damping reference run.
        #[arg(long)]
        skip_reference: bool,
    },
}

/// Error carrying its own exit code.
#[derive(Debug)]
pub struct Exit(pub u8, pub String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = err.downcast_ref::<Exit>() {
        return *code;
    }
    if err.downcast_ref::<Invalid>().is_some() {
        return 2;
    }
    match err.downcast_ref::<dualrail::Error>() {
        Some(dualrail::Error::ThresholdNotReached { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DUALRAIL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| config::invalid(format!("DUALRAIL_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(config::invalid("DUALRAIL_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    if !matches!(cli.window.len(), 0 | 2) {
        return Err(config::invalid("--window takes two values LO,HI"));
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    }
    .merge(&cli);
    match cli.command {
        Command::Amplitude => commands::amplitude(&cfg, cli.format),
        Command::Protocol => commands::protocol(&cfg, cli.format),
        Command::Optimize => commands::optimize(&cfg),
        Command::Fit { kind } => commands::fit(&cfg, kind),
        Command::Figure => commands::figure(&cfg, cli.format),
        Command::OracleCheck {
            inject_sign_error,
            skip_reference,
        } => commands::oracle_check(&cfg, inject_sign_error, skip_reference),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
