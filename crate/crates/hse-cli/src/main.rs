use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hse_cli::config::{CliOverrides, ConfigFile};
use hse_cli::{experiments, selftest, CliError};

/// Brickwork-circuit ergodicity experiments: simulate aperiodically driven
/// qudit chains and measure how their temporal ensembles approach Haar
/// moments on the full Hilbert space or on dynamically disconnected
/// subspaces.
#[derive(Parser)]
#[command(name = "hse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config and/or flags.
    Run(RunArgs),
    /// Krylov sector audit for the pair-flip model.
    Krylov(KrylovArgs),
    /// Quick oracle-equivalence suite.
    Selftest {
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment: gbw | scar | multiscar | hsf | symmetry | dee | diagnostics | krylov.
    #[arg(long)]
    experiment: Option<String>,
    /// Number of qudits.
    #[arg(long = "n")]
    n_sites: Option<usize>,
    /// Local dimension.
    #[arg(long = "d")]
    local_dim: Option<usize>,
    /// Evolution horizon (temporal-ensemble size).
    #[arg(long = "t-max")]
    horizon: Option<usize>,
    /// Circuit instances to average over.
    #[arg(long)]
    instances: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long = "out")]
    out_dir: Option<String>,
    /// Moment orders, comma separated (e.g. 1,2).
    #[arg(long = "k", value_delimiter = ',')]
    moments: Option<Vec<u32>>,
    /// Checkpoints per decade on the geometric grid.
    #[arg(long = "per-decade")]
    per_decade: Option<usize>,
    /// Initial states (zeros | ones | plus | all-basis | basis:0121 | haar-nonscar).
    #[arg(long = "initial", value_delimiter = ',')]
    initial_states: Option<Vec<String>>,
    /// Scar projector kind (p1 | p2 | pexp | plin).
    #[arg(long)]
    projector: Option<String>,
    /// Model family for dee/diagnostics (generic | scar | pair_flip).
    #[arg(long)]
    family: Option<String>,
    /// DEE: requested reference states per set.
    #[arg(long = "dee-count")]
    dee_count: Option<usize>,
    /// DEE: overlap-filter epsilon.
    #[arg(long = "dee-epsilon")]
    dee_epsilon: Option<f64>,
    /// DEE: number of independent reference sets.
    #[arg(long = "dee-repeats")]
    dee_repeats: Option<usize>,
    /// DEE: reference distribution (uniform | sampled).
    #[arg(long = "dee-reference")]
    dee_reference: Option<String>,
}

#[derive(Args)]
struct KrylovArgs {
    /// Number of qudits.
    #[arg(long = "n")]
    n_sites: usize,
    /// Local dimension.
    #[arg(long = "d")]
    local_dim: usize,
    /// Output directory.
    #[arg(long = "out")]
    out_dir: Option<String>,
    /// Master seed recorded in the manifest.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let file = match &args.config {
                Some(path) => ConfigFile::load(path)?,
                None => ConfigFile::default(),
            };
            let overrides = CliOverrides {
                experiment: args.experiment,
                n_sites: args.n_sites,
                local_dim: args.local_dim,
                horizon: args.horizon,
                instances: args.instances,
                moments: args.moments,
                initial_states: args.initial_states,
                projector: args.projector,
                seed: args.seed,
                out_dir: args.out_dir,
                per_decade: args.per_decade,
                family: args.family,
                dee_count: args.dee_count,
                dee_epsilon: args.dee_epsilon,
                dee_repeats: args.dee_repeats,
                dee_reference: args.dee_reference,
            };
            let cfg = hse_cli::config::resolve(&file, &overrides)?;
            experiments::run_experiment(&cfg)?;
            println!("wrote {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Krylov(args) => {
            let overrides = CliOverrides {
                experiment: Some("krylov".into()),
                n_sites: Some(args.n_sites),
                local_dim: Some(args.local_dim),
                seed: Some(args.seed),
                out_dir: args.out_dir,
                ..Default::default()
            };
            let cfg = hse_cli::config::resolve(&ConfigFile::default(), &overrides)?;
            experiments::run_experiment(&cfg)?;
            println!("wrote {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Selftest { seed } => selftest::run(seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
