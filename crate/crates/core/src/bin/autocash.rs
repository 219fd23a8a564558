use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use autocash::data::{load_csv, CsvOptions, TargetColumn};
use autocash::dqn::DqnParams;
use autocash::ga::{screen_hyperparameters, GaParams};
use autocash::meta_learner::MetaForestParams;
use autocash::metafeatures::{compute_all, META_FEATURE_NAMES};
use autocash::pipeline::{
    load_corpus, meta_stage, prepare, recommend, reward_stage, selection_stage, train_on, ModelArtifact, StageSeeds,
    TrainParams,
};
use autocash::portfolio::{AlgorithmId, Portfolio};
use autocash::rewards::{Labelling, MetaDataset, RewardTable};
use autocash::{Error, Result};

#[derive(Parser)]
#[command(name = "autocash", version, about = "Meta-learned algorithm selection and genetic hyperparameter tuning")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Root seed for every stage.
    #[arg(long, global = true, env = "AUTOCASH_SEED", default_value_t = 0)]
    seed: u64,
    /// Token marking a missing cell.
    #[arg(long, global = true, default_value = "?")]
    missing_token: String,
    /// Single-byte CSV field delimiter.
    #[arg(long, global = true, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Write JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Portfolio JSON (as printed by `portfolio` or `screen`); the standard one by default.
    #[arg(long, global = true)]
    portfolio: Option<PathBuf>,
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = GaParams::default().generations)]
    generations: usize,
    #[arg(long, default_value_t = GaParams::default().population)]
    population: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print the algorithm portfolio.
    Portfolio,
    /// Print the 23 meta-features of one dataset.
    Extract {
        #[arg(long)]
        data: PathBuf,
        /// Target column name or index; the last column by default.
        #[arg(long)]
        target: Option<String>,
    },
    /// Label every dataset in a directory with its best algorithm.
    EvaluatePortfolio {
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Estimate per-meta-feature rewards from a labelled meta-dataset.
    Rewards {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Select meta-features with the Q-learning agent.
    SelectFeatures {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        rewards: PathBuf,
        #[arg(long, default_value_t = DqnParams::default().episodes)]
        episodes: usize,
        #[arg(long, default_value_t = DqnParams::default().n_max)]
        n_max: usize,
    },
    /// Run every training stage and write the model artifact.
    Train {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = DqnParams::default().episodes)]
        episodes: usize,
    },
    /// Decide which hyperparameters of one algorithm stay tunable.
    Screen {
        #[arg(long)]
        alg: AlgorithmId,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        threshold: f64,
        #[command(flatten)]
        ga: GaArgs,
    },
    /// Recommend and tune an algorithm for a new dataset.
    Recommend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        ga: GaArgs,
    },
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single byte, got `{s}`")),
    }
}

/// Output of `evaluate-portfolio`, input of `rewards` and `select-features`.
#[derive(Serialize, Deserialize)]
struct MetaFile {
    labels: Vec<Labelling>,
    meta: MetaDataset,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn target_column(target: Option<String>) -> TargetColumn {
    target.as_deref().map(TargetColumn::from).unwrap_or(TargetColumn::Last)
}

#[derive(Serialize)]
struct LabelledValue {
    index: usize,
    name: &'static str,
    value: f64,
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let options = CsvOptions {
        delimiter: g.delimiter,
        missing_token: g.missing_token.clone(),
    };
    let portfolio = match &g.portfolio {
        Some(path) => Portfolio::new(read_json::<Portfolio>(path)?.algorithms().to_vec())?,
        None => Portfolio::standard(),
    };
    let seeds = StageSeeds::from_root(g.seed);
    let out = g.out.as_deref();
    match cli.command {
        Command::Portfolio => emit(out, &portfolio),
        Command::Extract { data, target } => {
            let d = load_csv(&data, &target_column(target), &options)?;
            let v = compute_all(&d);
            let values: Vec<LabelledValue> = v
                .values()
                .iter()
                .enumerate()
                .map(|(index, &value)| LabelledValue {
                    index,
                    name: META_FEATURE_NAMES[index],
                    value,
                })
                .collect();
            emit(out, &values)
        }
        Command::EvaluatePortfolio { data_dir } => {
            let datasets = load_corpus(&data_dir, &options)?;
            let (labels, meta) = meta_stage(&datasets, &portfolio, &seeds)?;
            emit(out, &MetaFile { labels, meta })
        }
        Command::Rewards { meta, repeats } => {
            let file: MetaFile = read_json(&meta)?;
            let table = reward_stage(&file.meta, repeats, &MetaForestParams::default(), &seeds)?;
            emit(out, &table)
        }
        Command::SelectFeatures {
            meta,
            rewards,
            episodes,
            n_max,
        } => {
            let file: MetaFile = read_json(&meta)?;
            let table: RewardTable = read_json(&rewards)?;
            let dqn = DqnParams {
                episodes,
                n_max,
                ..DqnParams::default()
            };
            let list = selection_stage(&table, &file.meta, &dqn, &MetaForestParams::default(), &seeds)?;
            emit(out, &list)
        }
        Command::Train {
            data_dir,
            repeats,
            episodes,
        } => {
            let datasets = load_corpus(&data_dir, &options)?;
            let params = TrainParams {
                seed: g.seed,
                reward_repeats: repeats,
                dqn: DqnParams {
                    episodes,
                    ..DqnParams::default()
                },
                ..TrainParams::default()
            };
            let artifact = train_on(&datasets, &portfolio, &params)?.artifact;
            write_text(out, &artifact.to_json()?)
        }
        Command::Screen {
            alg,
            data_dir,
            threshold,
            ga,
        } => {
            let datasets = load_corpus(&data_dir, &options)?
                .iter()
                .map(|d| prepare(d, seeds.impute))
                .collect::<Result<Vec<_>>>()?;
            let params = GaParams {
                generations: ga.generations,
                population: ga.population,
                seed: g.seed,
                ..GaParams::default()
            };
            let report = screen_hyperparameters(portfolio.get(alg)?, &datasets, threshold, &params)?;
            for p in &report.improvements {
                eprintln!("{:<20} {:+.4}  {}", p.name, p.improvement, if p.tunable { "tunable" } else { "fixed" });
            }
            let mut screened = portfolio.clone();
            screened.replace(report.spec)?;
            emit(out, &screened)
        }
        Command::Recommend { model, data, target, ga } => {
            let artifact = ModelArtifact::load(&model)?;
            let d = load_csv(&data, &target_column(target), &options)?;
            let params = GaParams {
                generations: ga.generations,
                population: ga.population,
                seed: g.seed,
                ..GaParams::default()
            };
            emit(out, &recommend(&artifact, &d, &params, &portfolio)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
