use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oamsim_cli::commands::{self, DatasetArgs, TomographyArgs, TomographyMode};
use oamsim_cli::{CliError, CliResult, RunConfig};

/// Train, characterize and tomograph polarization/OAM three-qubit gates.
#[derive(Parser)]
#[command(name = "oamsim", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; defaults apply to anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for training and sampling, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Gate target, overriding the config.
    #[arg(long, global = true)]
    target: Option<String>,
    /// Worker threads.
    #[arg(long, global = true, env = "OAMSIM_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train a phase stack for the target gate.
    Train,
    /// Characterize a trained stack: truth table, probes, process tomography.
    Characterize {
        /// Stack file; defaults to stack.oams in the output directory.
        #[arg(long)]
        stack: Option<PathBuf>,
        /// Characterize the exact target gate instead of a stack.
        #[arg(long, hide = true)]
        ideal: bool,
    },
    /// Reconstruct a state or process from a counts dataset.
    Tomography {
        #[arg(long)]
        dataset: PathBuf,
        /// Sidecar file; defaults to the dataset path with a .json extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Reference ρ (state) or χ (process) matrix CSV.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        input_row: Option<usize>,
    },
    /// Train and characterize every gate target.
    Demo,
    /// Write an ideal-gate counts dataset with its reference matrix.
    Dataset {
        /// `identity` or a gate target name.
        #[arg(long, default_value = "identity")]
        gate: String,
        /// Product-state input label such as `11-i`, for a state dataset.
        #[arg(long)]
        probe: Option<String>,
        /// Expected counts per unit-probability projector; exact if omitted.
        #[arg(long)]
        mean_total: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    State,
    Process,
}

fn load_config(g: &Global) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(g.config.as_deref())?;
    if let Some(out) = &g.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = g.seed {
        cfg.training.seed = seed;
        cfg.tomography.seed = seed;
    }
    if let Some(target) = &g.target {
        cfg.target = target.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads(cli.global.threads)?;
    let cfg = load_config(&cli.global)?;
    let quiet = cli.global.quiet;
    match cli.command {
        Command::Train => commands::cmd_train(&cfg, quiet),
        Command::Characterize { stack, ideal } => commands::cmd_characterize(&cfg, stack.as_deref(), ideal, quiet),
        Command::Tomography { dataset, sidecar, mode, reference, input_row } => {
            let mode = match mode {
                Mode::State => TomographyMode::State,
                Mode::Process => TomographyMode::Process,
            };
            commands::cmd_tomography(&cfg, &TomographyArgs { dataset, sidecar, mode, reference, input_row }, quiet)
        }
        Command::Demo => commands::cmd_demo(&cfg, quiet),
        Command::Dataset { gate, probe, mean_total } => {
            commands::cmd_dataset(&cfg, &DatasetArgs { gate, probe, mean_total }, quiet)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oamsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
