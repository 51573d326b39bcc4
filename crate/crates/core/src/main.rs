use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncs_core::cli::{self, ExperimentConfig};
use ncs_core::filters::EstimatorKind;
use ncs_core::model::LossStrategy;
use ncs_core::Error;

#[derive(Parser)]
#[command(name = "ncs", version, about = "Joint state and packet-loss mode estimation for networked control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment.
    Run(RunArgs),
    /// Print the resolved config as TOML.
    ShowConfig(Source),
}

#[derive(Args)]
struct Source {
    /// Built-in preset (cstr5).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Require an explicit seed instead of drawing one.
    #[arg(long)]
    reproduce: bool,
    /// Comma-separated subset of alg1,alg2,imm.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<EstimatorKind>>,
    #[arg(long)]
    strategy: Option<LossStrategy>,
    /// Write trial_XXXX.csv for every trial.
    #[arg(long)]
    emit_steps: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hist_bin_width: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(source: &Source) -> ncs_core::Result<ExperimentConfig> {
    let preset = match (&source.preset, &source.config) {
        (None, None) => Some("cstr5"),
        (p, _) => p.as_deref(),
    };
    cli::load(preset, source.config.as_deref())
}

fn run(args: RunArgs) -> ncs_core::Result<ExitCode> {
    let mut cfg = resolve(&args.source)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(n) = args.steps {
        cfg.steps = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(e) = args.estimators {
        cfg.estimators = e;
    }
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    if args.emit_steps {
        cfg.output.emit_steps = true;
    }
    if let Some(dir) = args.out {
        cfg.output.dir = dir.display().to_string();
    }
    if let Some(w) = args.hist_bin_width {
        cfg.hist_bin_width = w;
    }
    cfg.validate()?;

    let seed = match (cfg.seed, args.reproduce) {
        (Some(s), _) => s,
        (None, true) => return Err(Error::config("seed", "--reproduce needs a seed (--seed or `seed` in the config)")),
        (None, false) => rand::random(),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let report = pool.install(|| cli::run_experiment(&cfg, seed))?;

    println!(
        "{}: {} trials × {} steps, {} strategy, seed {}",
        report.info.name, report.info.trials, report.info.steps, report.info.strategy, report.info.seed
    );
    print!("{}", report.summary.to_table());
    println!("wrote {} files to {}", report.files.len(), cfg.output.dir);
    if report.info.failed_trials > 0 {
        eprintln!("{} trial(s) had an estimator failure", report.info.failed_trials);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::ShowConfig(source) => resolve(&source).map(|cfg| {
            print!("{}", cfg.to_toml());
            ExitCode::SUCCESS
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::Parse(_) => 2,
                _ => 1,
            })
        }
    }
}
