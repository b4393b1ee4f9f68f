use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fleetreg::error::Result;
use fleetreg::experiment::{
    env_seed_override, run_benchmark, run_explain, run_repro, run_sweep, ExperimentConfig,
};
use fleetreg::synthgen::{generate, GeneratorConfig};

/// Fleet-based regression: partition a heterogeneous dataset, fit one
/// regressor per partition, and compare against a single global model.
///
/// Every command is deterministic given the seed in its config; set
/// FLEETREG_SEED to override all config seeds at once.
#[derive(Parser)]
#[command(name = "fleetreg", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic clustered dataset from a generator config.
    Generate {
        /// Generator config (JSON).
        #[arg(short = 'c', long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Optional path for the generating parameters (JSON).
        #[arg(short = 't', long)]
        truth: Option<PathBuf>,
    },
    /// Cross-validate every (regressor, mode) pair in an experiment config
    /// and write a metrics table plus per-row predictions.
    Benchmark {
        /// Experiment config (JSON).
        #[arg(short = 'c', long)]
        config: PathBuf,
    },
    /// Re-run the benchmark at several difficulty factors (scales the
    /// synthetic cluster spread and sample noise) and write one long CSV.
    Sweep {
        /// Experiment config (JSON) with a synthetic dataset source.
        #[arg(short = 'c', long)]
        config: PathBuf,
        /// Ascending difficulty factors, e.g. 1,2,4,8.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<f64>,
    },
    /// Explain held-out rows under the global model and the fleet model and
    /// write importance and consistency reports.
    Explain {
        /// Experiment config (JSON).
        #[arg(short = 'c', long)]
        config: PathBuf,
    },
    /// Run the whole reference pipeline (generate, benchmark, sweep,
    /// explain) into one directory.
    Repro {
        /// Output directory.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Override the reference seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let raw = std::fs::read_to_string(path)
        .map_err(|source| fleetreg::Error::Io { path: path.clone(), source })?;
    Ok(serde_json::from_str(&raw)?)
}

fn load_experiment(path: &PathBuf) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = read_json(path)?;
    if let Some(seed) = env_seed_override()? {
        cfg.override_seed(seed);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, output, truth } => {
            let mut cfg: GeneratorConfig = read_json(&config)?;
            if let Some(seed) = env_seed_override()? {
                cfg.seed = seed;
            }
            let ds = generate(&cfg)?;
            ds.data.save_csv(&output)?;
            println!(
                "wrote {} rows x {} features ({} clusters) to {}",
                ds.data.n(),
                ds.data.k(),
                cfg.m_clusters,
                output.display()
            );
            if let Some(truth_path) = truth {
                ds.save_truth(&truth_path)?;
                println!("wrote generating parameters to {}", truth_path.display());
            }
        }
        Command::Benchmark { config } => {
            let cfg = load_experiment(&config)?;
            let out = run_benchmark(&cfg)?;
            print!("{}", out.table());
            for row in &out.rows {
                for w in &row.report.warnings {
                    eprintln!("warning [{}]: {}", row.method, w);
                }
            }
            println!("wrote benchmark.json, benchmark.txt, and predictions to {}", cfg.outputs.display());
        }
        Command::Sweep { config, factors } => {
            let cfg = load_experiment(&config)?;
            let rows = run_sweep(&cfg, &factors)?;
            println!(
                "wrote {} rows over factors {:?} to {}",
                rows.len(),
                factors,
                cfg.outputs.join("sweep.csv").display()
            );
        }
        Command::Explain { config } => {
            let cfg = load_experiment(&config)?;
            let out = run_explain(&cfg)?;
            for w in out.global_consistency.warnings.iter().chain(&out.fbr_consistency.warnings) {
                eprintln!("warning: {w}");
            }
            println!(
                "explained {} held-out rows; reports written to {}",
                out.fbr_explanations.len(),
                cfg.outputs.display()
            );
        }
        Command::Repro { output, seed } => {
            let seed = match env_seed_override()? {
                Some(s) => Some(s),
                None => seed,
            };
            run_repro(&output, seed)?;
            println!("reference pipeline complete in {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
