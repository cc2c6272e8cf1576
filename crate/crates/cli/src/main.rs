use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

mod commands;

/// Symbolic-regression boosting: fit, predict and benchmark.
#[derive(Debug, Parser)]
#[command(name = "syrbo", version)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "SYRBO_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a boosted model on a whole dataset and save it.
    Fit(FitArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Cross-validated comparison of the boosted model against one stage.
    Experiment(ExperimentArgs),
    /// Recompute medians, p-values and labels from stored records.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct GpArgs {
    /// Number of boosting stages (1 = plain symbolic regression).
    #[arg(long, env = "SYRBO_STAGES", value_parser = clap::value_parser!(u64).range(1..))]
    stages: u64,

    #[arg(long, default_value_t = 200, env = "SYRBO_POPULATION_SIZE", value_parser = clap::value_parser!(u64).range(1..))]
    population_size: u64,

    #[arg(long, default_value_t = 200, env = "SYRBO_GENERATIONS", value_parser = clap::value_parser!(u64).range(1..))]
    generations: u64,

    #[arg(long, default_value_t = 0, env = "SYRBO_SEED")]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Training data (TSV/CSV with header, optionally .gz).
    #[arg(long)]
    data: PathBuf,

    #[arg(long, default_value = syrbo::data::DEFAULT_TARGET, env = "SYRBO_TARGET_COLUMN")]
    target_column: String,

    #[command(flatten)]
    gp: GpArgs,

    /// Where to write the model file.
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,

    /// Input rows; a target column, if present, is used to report MAE.
    #[arg(long)]
    data: PathBuf,

    #[arg(long, default_value = syrbo::data::DEFAULT_TARGET, env = "SYRBO_TARGET_COLUMN")]
    target_column: String,

    /// Where to write predictions, one per line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// One or more datasets.
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,

    #[arg(long, default_value = syrbo::data::DEFAULT_TARGET, env = "SYRBO_TARGET_COLUMN")]
    target_column: String,

    #[command(flatten)]
    gp: GpArgs,

    #[arg(long, default_value_t = 5, env = "SYRBO_FOLDS", value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,

    #[arg(long, default_value_t = 30, env = "SYRBO_REPLICATES", value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,

    /// Permutation-test rounds.
    #[arg(long, default_value_t = 10_000, env = "SYRBO_ROUNDS", value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,

    #[arg(long, env = "SYRBO_OUT_DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Records file supplying the candidate scores.
    #[arg(long)]
    candidate: PathBuf,

    /// Records file supplying the reference scores.
    #[arg(long)]
    reference: PathBuf,

    #[arg(long, default_value = "syrbo")]
    candidate_algorithm: syrbo::harness::Algorithm,

    #[arg(long, default_value = "baseline")]
    reference_algorithm: syrbo::harness::Algorithm,

    #[arg(long, default_value_t = 10_000, env = "SYRBO_ROUNDS", value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,

    #[arg(long, default_value_t = 0, env = "SYRBO_SEED")]
    seed: u64,

    /// Write comparison.json and summary.txt here instead of printing.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("SYRBO_LOG")
        .format_timestamp(None)
        .init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(commands::EXIT_RUNTIME);
        }
    };

    let result = pool.install(|| match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Compare(a) => commands::compare(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
