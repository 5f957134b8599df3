//! Command-line front end: run an experiment grid from a config file or a
//! preset and emit CSV / plot-data files.
//!
//! Exit codes: 0 success, 1 invalid config or validation failure, 2 runtime
//! failure (e.g. an unwritable output path).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pots_sim::experiment::{
    emit_csv, emit_plotdata, load_config, preset, preset_names, run_grid, ExperimentGrid,
    GridError,
};
use pots_sim::model::AllocationScheme;

#[derive(Parser)]
#[command(
    name = "pots-sim",
    version,
    about = "Deterministic Monte-Carlo simulator for team-sprint reward games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write result tables
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a JSON experiment config
    #[arg(long, value_name = "PATH", required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Name of a built-in experiment (see --help for the list)
    #[arg(long, value_name = "NAME", help = preset_help())]
    preset: Option<String>,

    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for result files
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Rounds per run override
    #[arg(long)]
    rounds: Option<usize>,

    /// Runs per cell override
    #[arg(long)]
    runs: Option<usize>,

    /// Team sizes override, comma separated (e.g. 1,2,4)
    #[arg(long, value_name = "SIZES", value_delimiter = ',')]
    team_sizes: Option<Vec<usize>>,

    /// Allocation scheme override
    #[arg(long, value_enum, value_name = "SCHEME")]
    scheme: Option<SchemeArg>,

    /// Which output files to write
    #[arg(long, value_enum, default_value_t = FormatArg::Both)]
    format: FormatArg,

    /// Worker threads for cell/run execution (0 = one per core). Results do
    /// not depend on this.
    #[arg(long, env = "POTS_SIM_THREADS", default_value_t = 0, value_name = "N")]
    threads: usize,
}

fn preset_help() -> String {
    format!("Name of a built-in experiment [{}]", preset_names().join(", "))
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Equal,
    Proportional,
    Both,
}

impl SchemeArg {
    fn schemes(self) -> Vec<AllocationScheme> {
        match self {
            SchemeArg::Equal => vec![AllocationScheme::EqualShare],
            SchemeArg::Proportional => vec![AllocationScheme::Proportional],
            SchemeArg::Both => vec![
                AllocationScheme::EqualShare,
                AllocationScheme::Proportional,
            ],
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Csv,
    Plotdata,
    Both,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not failures; anything else is a usage
            // problem and lands on the validation exit code.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err}");
                ExitCode::from(err.exit_code())
            }
        },
    }
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error(transparent)]
    Setup(GridError),
    #[error(transparent)]
    Runtime(GridError),
    #[error("cannot build a {threads}-thread worker pool: {source}")]
    Pool {
        threads: usize,
        source: rayon::ThreadPoolBuildError,
    },
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Setup(_) => 1,
            AppError::Runtime(_) | AppError::Pool { .. } => 2,
        }
    }
}

fn run(args: RunArgs) -> Result<(), AppError> {
    let mut grid: ExperimentGrid = match (&args.config, &args.preset) {
        (Some(path), None) => load_config(path).map_err(AppError::Setup)?,
        (None, Some(name)) => preset(name).map_err(AppError::Setup)?,
        // clap enforces exactly one of the two.
        _ => unreachable!("--config and --preset are mutually exclusive and one is required"),
    };

    if let Some(seed) = args.seed {
        grid.master_seed = seed;
    }
    if let Some(rounds) = args.rounds {
        grid.rounds = rounds;
    }
    if let Some(runs) = args.runs {
        grid.runs = runs;
    }
    if let Some(team_sizes) = args.team_sizes {
        grid.team_sizes = team_sizes;
    }
    if let Some(scheme) = args.scheme {
        grid.schemes = scheme.schemes();
    }
    // Overrides can invalidate a previously fine grid (e.g. --team-sizes 3).
    grid.validate().map_err(AppError::Setup)?;

    let started = Instant::now();
    let reports = if args.threads == 0 {
        run_grid(&grid)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|source| AppError::Pool {
                threads: args.threads,
                source,
            })?;
        pool.install(|| run_grid(&grid))
    }
    .map_err(AppError::Runtime)?;
    let elapsed = started.elapsed();

    if args.format != FormatArg::Plotdata {
        let path = args.out.join("results.csv");
        emit_csv(&reports, &path).map_err(AppError::Runtime)?;
        println!("wrote {}", path.display());
    }
    if args.format != FormatArg::Csv {
        let written = emit_plotdata(&reports, &args.out).map_err(AppError::Runtime)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    println!(
        "done: {} cells ({} runs x {} rounds each), seed {}, {:.1?}",
        reports.len(),
        grid.runs,
        grid.rounds,
        grid.master_seed,
        elapsed
    );
    Ok(())
}
