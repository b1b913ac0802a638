use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floorplan_cli::artifacts::Manifest;
use floorplan_cli::config::{PipelineConfig, THREADS_ENV};
use floorplan_cli::{pipeline, CliError};
use floorplan_core::CaseId;

/// Predict partially reconfigurable platform choices for data-flow graphs.
#[derive(Parser)]
#[command(name = "floorplan", version)]
struct Cli {
    /// Pipeline config (TOML). Without one, built-in defaults apply and
    /// relative paths resolve against the working directory.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory; beats both the config and FLOORPLAN_OUT_DIR.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CaseArg {
    /// Case I..V; every configured case when omitted.
    #[arg(long)]
    case: Option<CaseId>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the training corpus and the held-out corpus.
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        corpus_size: Option<usize>,
    },
    /// Simulate every graph on every candidate platform of a case.
    Sweep(CaseArg),
    /// Label each graph with its fittest candidate and extract features.
    Dataset(CaseArg),
    /// Cross-validate the configured classifiers and save full-data models.
    Evaluate {
        #[command(flatten)]
        case: CaseArg,
        /// Comma-separated classifier names.
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<String>>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Predict the class of DFG files with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        dfgs: Vec<PathBuf>,
    },
    /// Compare predicted, random and best platforms on held-out graphs.
    Baseline {
        #[command(flatten)]
        case: CaseArg,
        /// Defaults to the configured model of the case's evaluation.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarise every configured case's evaluation and baseline.
    Report,
    /// Generate, sweep, dataset, evaluate, baseline and report in one go.
    Run,
    /// Print the effective configuration as TOML.
    Config,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => {
            let mut cfg = PipelineConfig::default();
            cfg.resolve(&std::env::current_dir().map_err(|e| CliError::Other(e.into()))?);
            cfg.apply_env();
            cfg
        }
    };
    if let Some(dir) = &cli.out_dir {
        cfg.paths.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    let Some(v) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .to_string_lossy()
        .parse()
        .map_err(|_| CliError::Invalid(format!("{THREADS_ENV} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.into()))
}

fn cases(cfg: &PipelineConfig, arg: &CaseArg) -> Result<Vec<CaseId>, CliError> {
    match arg.case {
        Some(c) => Ok(vec![c]),
        None => cfg.case_ids(),
    }
}

fn show(m: &Manifest) {
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Generate { seed, corpus_size } => {
            if let Some(s) = seed {
                cfg.generator.seed = *s;
            }
            if let Some(n) = corpus_size {
                cfg.generator.corpus_size = *n;
            }
        }
        Command::Evaluate { classifiers, k, .. } => {
            if let Some(c) = classifiers {
                cfg.evaluation.classifiers = c.clone();
            }
            if let Some(k) = k {
                cfg.evaluation.k = *k;
            }
        }
        Command::Baseline { seed: Some(s), .. } => cfg.baseline.seed = *s,
        _ => {}
    }
    cfg.validate()?;

    match &cli.command {
        Command::Generate { .. } => {
            let m = pipeline::generate(&cfg)?;
            show(&m);
            eprintln!("wrote corpus to {}", cfg.corpus_dir().display());
        }
        Command::Sweep(arg) => {
            for case in cases(&cfg, arg)? {
                show(&pipeline::sweep(&cfg, case)?);
            }
        }
        Command::Dataset(arg) => {
            for case in cases(&cfg, arg)? {
                show(&pipeline::dataset(&cfg, case)?);
            }
        }
        Command::Evaluate { case, .. } => {
            for case in cases(&cfg, case)? {
                show(&pipeline::evaluate(&cfg, case)?);
                print!("{}", std::fs::read_to_string(cfg.case_dir(case).join(pipeline::REPORT_CSV)).unwrap_or_default());
            }
        }
        Command::Predict { model, dfgs } => {
            print!("{}", pipeline::predict(&cfg, model, dfgs)?);
        }
        Command::Baseline { case, model, .. } => {
            for case in cases(&cfg, case)? {
                let (table, m) = pipeline::baseline(&cfg, case, model.as_deref())?;
                show(&m);
                print!("{}", table.to_csv());
            }
        }
        Command::Report => {
            show(&pipeline::report(&cfg)?);
            print!("{}", std::fs::read_to_string(cfg.paths.out_dir.join("summary.csv")).unwrap_or_default());
        }
        Command::Run => {
            for m in pipeline::run(&cfg)? {
                show(&m);
            }
            eprintln!("artifacts in {}", cfg.paths.out_dir.display());
        }
        Command::Config => print!("{}", cfg.to_toml()),
    }
    Ok(())
}
