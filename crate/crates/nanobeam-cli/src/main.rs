//! `nanobeam` — rate-theory analysis of the buckled two-mode nanobeam from
//! the command line.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};

use commands::Context;
use config::{OutputFormat, RunConfig};
use output::Writer;

/// CLI-level error with the documented exit codes: 2 for configuration
/// problems, 3 for numeric failures, 1 for I/O.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            CliError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nanobeam",
    version,
    about = "Phase-space reaction-rate analysis of a compressed two-mode nanobeam",
    after_help = "Thread count is controlled by the RAYON_NUM_THREADS environment variable."
)]
struct Cli {
    /// JSON configuration file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Strain preset: I, II, or III.
    #[arg(long, global = true)]
    case: Option<String>,

    /// Shell energy in scaled units (repeatable; replaces the config list).
    #[arg(long = "energy", global = true, allow_hyphen_values = true)]
    energies: Vec<f64>,

    /// Sample count for the invoked command's primary ensemble.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Master seed for all random sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Output encodings to write.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the three strain presets and the critical strain.
    Cases,
    /// Dump the derived constants and physical scales for one case.
    Derive,
    /// Catalogue the equilibria of the scaled Hamiltonian.
    Equilibria,
    /// Normal-hyperbolicity energy bound and per-energy margins.
    Nhim,
    /// Directional flux through the dividing surface (three methods).
    Flux,
    /// Reactant density of states (quadrature and 4-D cross-check).
    Dos,
    /// Gap-time ensembles and the derived rate table.
    Gaps,
    /// Reactive-flux correlation function K(t).
    Fluxcorr,
    /// Gap-time map over the dividing surface.
    Dsmap,
    /// Plot-ready trajectory dumps.
    Trajectories,
    /// Everything above for one case, energy by energy.
    Report,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(case) = cli.case {
        config.case = case;
        config.epsilon = None;
    }
    if !cli.energies.is_empty() {
        config.energies = cli.energies.clone();
        config.energies_kelvin.clear();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    let resolved = config.resolve()?;
    let writer = Writer::new(
        &resolved.config.out_dir,
        &resolved.config_hash,
        resolved.config.seed,
        resolved.config.format.csv(),
        resolved.config.format.json(),
    )?;
    let ctx = Context {
        resolved,
        writer,
        samples: cli.samples,
    };
    match cli.command {
        Command::Cases => commands::cmd_cases(&ctx),
        Command::Derive => commands::cmd_derive(&ctx),
        Command::Equilibria => commands::cmd_equilibria(&ctx),
        Command::Nhim => commands::cmd_nhim(&ctx),
        Command::Flux => commands::cmd_flux(&ctx),
        Command::Dos => commands::cmd_dos(&ctx),
        Command::Gaps => commands::cmd_gaps(&ctx),
        Command::Fluxcorr => commands::cmd_fluxcorr(&ctx),
        Command::Dsmap => commands::cmd_dsmap(&ctx),
        Command::Trajectories => commands::cmd_trajectories(&ctx),
        Command::Report => commands::cmd_report(&ctx),
    }
}
