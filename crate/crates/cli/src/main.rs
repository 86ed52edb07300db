use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use uq_cli::config::{parse_grid, resolve, ConfigLayer};
use uq_cli::ingest::{ingest_csv, ingest_queries};
use uq_cli::manifest::{fingerprint, RunManifest};
use uq_cli::output::{curves_csv, query_csv, scores_csv, QueryScores};
use uq_core::bayes::{bayes_decomposition, bma_prediction, posterior_weights};
use uq_core::credal::LeviAgent;
use uq_core::ensemble::{ensemble_output, train_forest, ForestConfig, ForestModel};
use uq_core::eval::run_experiment;

#[derive(Parser)]
#[command(name = "uq", version, about = "Uncertainty quantification for tree ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the accuracy-rejection experiment and write curves.csv and manifest.json.
    Experiment(ExperimentArgs),
    /// Score query rows with all three methods.
    Uq(UqArgs),
    /// Dataset utilities.
    Datasets {
        #[command(subcommand)]
        command: DatasetsCommand,
    },
}

#[derive(Subcommand)]
enum DatasetsCommand {
    /// Print the SHA-256 of each file.
    Fingerprint { paths: Vec<PathBuf> },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Flat JSON object with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Comma-separated rejection rates.
    #[arg(long, value_parser = parse_grid)]
    rejection_grid: Option<Vec<f64>>,
    /// Evaluate member likelihoods on out-of-bag rows only.
    #[arg(long)]
    oob_likelihood: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write per-instance scores of the last run.
    #[arg(long)]
    emit_scores: bool,
}

#[derive(Args)]
struct UqArgs {
    /// Training data; mutually exclusive with --model.
    #[arg(long, requires = "label", conflicts_with = "model")]
    data: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Forest in text form, as written by --save-model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    delta: f64,
    #[arg(long, default_value_t = 10)]
    trees: usize,
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Experiment(args) => cmd_experiment(args),
        Command::Uq(args) => cmd_uq(args),
        Command::Datasets {
            command: DatasetsCommand::Fingerprint { paths },
        } => {
            for path in paths {
                let hash = fingerprint(&path).with_context(|| format!("reading {}", path.display()))?;
                println!("{hash}  {}", path.display());
            }
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("UQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("UQ_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    let flags = ConfigLayer {
        data: args.data,
        label: args.label,
        train_fraction: args.train_fraction,
        runs: args.runs,
        delta: args.delta,
        trees: args.trees,
        max_depth: args.max_depth,
        rejection_grid: args.rejection_grid,
        seed: args.seed,
        oob_likelihood: args.oob_likelihood.then_some(true),
    };
    let config = resolve(file, flags)?;
    let ingested = ingest_csv(&config.data, &config.label)?;
    if !ingested.skipped_lines.is_empty() {
        eprintln!(
            "skipped {} rows with missing values (lines {:?})",
            ingested.skipped_lines.len(),
            ingested.skipped_lines
        );
    }
    let dataset_sha256 = fingerprint(&config.data)?;
    let result = run_experiment(&ingested.dataset, &config.experiment)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut outputs = vec!["curves.csv".to_string()];
    write_file(&args.out.join("curves.csv"), &curves_csv(&result.curves))?;
    if args.emit_scores {
        write_file(&args.out.join("scores.csv"), &scores_csv(&result.last_run))?;
        outputs.push("scores.csv".into());
    }
    outputs.push("manifest.json".into());
    let manifest = RunManifest::new(config, dataset_sha256, outputs);
    write_file(&args.out.join("manifest.json"), &manifest.to_json())
}

fn cmd_uq(args: UqArgs) -> Result<()> {
    let forest = match (&args.data, &args.model) {
        (Some(data), None) => {
            let label = args.label.as_deref().expect("clap enforces --label");
            let ingested = ingest_csv(data, label)?;
            let config = ForestConfig {
                n_trees: args.trees,
                max_depth: args.max_depth,
                seed: args.seed,
                ..ForestConfig::default()
            };
            train_forest(&ingested.dataset, &config)?
        }
        (None, Some(model)) => {
            let text = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
            ForestModel::from_text(&text).with_context(|| format!("loading {}", model.display()))?
        }
        _ => bail!("exactly one of --data or --model is required"),
    };
    if let Some(path) = &args.save_model {
        write_file(path, &forest.to_text())?;
    }
    let queries = ingest_queries(&args.query, args.label.as_deref())?;
    if let Some((i, row)) = queries.iter().enumerate().find(|(_, r)| r.len() != forest.n_features()) {
        bail!(
            "query line {}: expected {} features, found {}",
            i + 2,
            forest.n_features(),
            row.len()
        );
    }
    let agent = LeviAgent::new(forest.trees().len(), args.delta)?;
    let scores = queries
        .par_iter()
        .map(|x| -> uq_core::Result<QueryScores> {
            let ens = ensemble_output(&forest, x)?;
            let weights = posterior_weights(&ens)?;
            let credal = agent.measures(&ens)?;
            Ok(QueryScores {
                predicted: bma_prediction(&ens, &weights)?.argmax(),
                reports: [bayes_decomposition(&ens, &weights)?, credal.gh_report()?, credal.ent_report()?],
            })
        })
        .collect::<uq_core::Result<Vec<_>>>()?;
    let table = query_csv(&scores);
    match &args.out {
        Some(path) => write_file(path, &table),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
