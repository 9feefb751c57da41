//! Command-line front end: one subcommand per operation, settings from flags
//! and an optional TOML config, a manifest written next to every output.
//!
//! Exit codes: 0 on success, 1 when an asserted property fails (or the run
//! itself errors), 2 on usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub mod commands;
pub mod manifest;
pub mod settings;

use settings::{converge_settings, flag_table, resolve, ConfigFile};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or values.
    Usage(String),
    /// An asserted property does not hold; outputs are still written.
    Failed(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twocons", version, about = "Lattice gases with two conservation laws: conditions, fluxes, simulation, PDE oracles, entropies and experiments")]
pub struct Cli {
    /// Random seed (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML config; a manifest of an earlier run is accepted as well.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural conditions of a model.
    Validate(ValidateFlags),
    /// Tabulate the macroscopic fluxes and check the Onsager relation.
    Fluxes(FluxesFlags),
    /// Run one particle trajectory from a local equilibrium.
    Simulate(SimulateFlags),
    /// Solve the conservation-law system on the torus.
    SolvePde(SolvePdeFlags),
    /// Build the cutoff entropy table.
    BuildEntropy(EntropyFlags),
    /// Fit the constants of the entropy bounds.
    VerifyBounds(EntropyFlags),
    /// Compare replica-mean particle fields with the PDE.
    Converge(ConvergeFlags),
    /// Tail dominations of block averages.
    Tails(TailsFlags),
    /// Exhaustive microcanonical exponential moments.
    Enumerate(EnumerateFlags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Fluxes(_) => "fluxes",
            Command::Simulate(_) => "simulate",
            Command::SolvePde(_) => "solve-pde",
            Command::BuildEntropy(_) => "build-entropy",
            Command::VerifyBounds(_) => "verify-bounds",
            Command::Converge(_) => "converge",
            Command::Tails(_) => "tails",
            Command::Enumerate(_) => "enumerate",
        }
    }
}

// Flag structs mirror the settings keys; unset flags are not serialized, so
// the config file and the defaults show through.

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateFlags {
    /// `pm1`, `two-lane` or `two-lane:<gamma>`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FluxesFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_mean: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_sin: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_cos: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_mean: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_sin: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_cos: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `eulerian` or `intermediate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Block length `l`.
    #[arg(long, alias = "l")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replica: Option<u64>,
    /// Independent replicas run in parallel; fields are their mean.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profiles: ProfileFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolvePdeFlags {
    /// Solve the limit system with this `gamma`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Solve with the fluxes of this model instead.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// `muscl` or `central4`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profiles: ProfileFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropyFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_lo: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_hi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    /// Use the rescaled two-lane flux at this `n`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeFlags {
    /// Base experiment: `eulerian` or `intermediate`.
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trig_modes: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_points: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailsFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_exceedances: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnumerateFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_lens: Option<Vec<usize>>,
}

/// Everything a command needs after flags and config are merged.
pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub command: &'static str,
}

impl Context {
    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "twocons-out";

/// Parses `argv`, runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!(
                    "error: {}\n\nUsage: twocons [OPTIONS] <COMMAND>\nFor more information, try '--help'.",
                    m.trim_end()
                ),
                CliError::Failed(m) => eprintln!("assertion failed: {m}"),
                CliError::Runtime(err) => eprintln!("error: {err:#}"),
            }
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let command = cli.command.name();
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: cli.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        threads: cli.threads.or(file.threads),
        command,
    };
    if ctx.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let section = file.section(command);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = ctx.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(anyhow::Error::from)?;
    std::fs::create_dir_all(&ctx.out)?;
    pool.install(|| match &cli.command {
        Command::Validate(f) => commands::validate(&ctx, resolve(command, section, flag_table(f))?),
        Command::Fluxes(f) => commands::fluxes(&ctx, resolve(command, section, flag_table(f))?),
        Command::Simulate(f) => commands::simulate(&ctx, resolve(command, section, flag_table(f))?),
        Command::SolvePde(f) => commands::solve_pde(&ctx, resolve(command, section, flag_table(f))?),
        Command::BuildEntropy(f) => commands::build_entropy(&ctx, resolve(command, section, flag_table(f))?),
        Command::VerifyBounds(f) => commands::verify_bounds(&ctx, resolve(command, section, flag_table(f))?),
        Command::Converge(f) => {
            let mut table = section.unwrap_or_default();
            table.extend(flag_table(f));
            // An explicit seed wins over the one stored in the experiment.
            if let Some(s) = cli.seed.or(file.seed) {
                table.insert("seed".into(), toml::Value::Integer(s as i64));
            }
            let cfg = converge_settings(Some(table), f.preset.as_deref())?;
            commands::converge(&Context { seed: cfg.seed, ..ctx }, cfg)
        }
        Command::Tails(f) => commands::tails(&ctx, resolve(command, section, flag_table(f))?),
        Command::Enumerate(f) => commands::enumerate(&ctx, resolve(command, section, flag_table(f))?),
    })
}

/// Writes `text` to `dir/name` and returns the path.
pub fn write_text(dir: &Path, name: &str, text: &str) -> std::io::Result<PathBuf> {
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    Ok(p)
}
