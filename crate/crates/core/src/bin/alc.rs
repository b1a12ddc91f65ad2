use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use alc::harness::{run_experiment, ExperimentConfig, ExperimentKind, Params, RunReport};
use alc::AlcError;

const EXIT_CONFIG: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_ASSERT: u8 = 4;

#[derive(Parser)]
#[command(name = "alc", version, about = "Seeded analog compression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Covering-number dimension estimate of a point set.
    Dim(RunArgs),
    /// Smallest image norm over sampled sparse unit vectors.
    Nsp(RunArgs),
    /// Exhaustive sparse recovery trials.
    Recover(RunArgs),
    /// Kronecker-structured recovery trials.
    Kron(RunArgs),
    /// Collision search between Kronecker signals.
    Collide(RunArgs),
    /// Interleaving round-trip check.
    Interleave(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file with `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Draw a new matrix for every trial.
    #[arg(long)]
    fresh_matrix: bool,
    /// Exit with status 4 if any check of the run fails.
    #[arg(long)]
    assert: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Self::Dim(a) => (ExperimentKind::Dim, a),
            Self::Nsp(a) => (ExperimentKind::Nsp, a),
            Self::Recover(a) => (ExperimentKind::Recover, a),
            Self::Kron(a) => (ExperimentKind::Kron, a),
            Self::Collide(a) => (ExperimentKind::Collide, a),
            Self::Interleave(a) => (ExperimentKind::Interleave, a),
        }
    }
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, AlcError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| AlcError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse_as(&text, Some(kind))?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if args.fresh_matrix {
        match &mut cfg.params {
            Params::Recover(p) => p.fresh_matrix = true,
            Params::Kron(p) => p.fresh_matrix = true,
            _ => return Err(AlcError::Config(format!("--fresh-matrix does not apply to `{kind}`"))),
        }
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<RunReport, AlcError> {
    let cfg = load(kind, args)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(AlcError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| AlcError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_experiment(&cfg))
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    match run(kind, &args) {
        Ok(report) => {
            match serde_json::to_string_pretty(&report) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {}: {}", c.name, c.detail);
            }
            if args.assert && !report.all_passed() {
                return ExitCode::from(EXIT_ASSERT);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AlcError::Config(_) | AlcError::InvalidArgument(_) => EXIT_CONFIG,
                AlcError::ResourceLimit(_) => EXIT_RESOURCE,
                _ => 1,
            })
        }
    }
}
