use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use reaction_sentiment::annotate::ZeroPolicy;
use reaction_sentiment::corpus::{filter_annotatable, load_corpus, save_corpus, InputFormat};
use reaction_sentiment::eval::Averaging;
use reaction_sentiment::neural::{all_specs, ModelSpec, Readout};
use reaction_sentiment::records::{load_jsonl, save_jsonl, CleanedPost, LabeledPost};
use reaction_sentiment::synthetic::{generate, SyntheticConfig};
use reaction_sentiment_cli::pipeline::{self, Splits};
use reaction_sentiment_cli::PipelineConfig;

#[derive(Parser, Debug)]
#[command(author, version, about = "Reaction-supervised sentiment pipeline for Sinhala posts", long_about = None)]
struct Cli {
    /// TOML configuration file. Flags override its values.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Corpus format: delimited or jsonl.
    #[arg(long, global = true)]
    format: Option<InputFormat>,

    #[arg(long, global = true)]
    delimiter: Option<char>,

    /// Posts without love, wow, sad or angry reactions: drop or positive.
    #[arg(long, global = true)]
    zero_policy: Option<ZeroPolicy>,

    /// Metric averaging: weighted or macro.
    #[arg(long, global = true)]
    averaging: Option<Averaging>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reaction totals and their shares.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Normalize messages into cleaned token records.
    Preprocess {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Label cleaned records from their reactions.
    Annotate {
        cleaned: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Shuffle labeled records into train, val and test files.
    Split {
        labeled: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fit baselines and train networks on a split directory.
    Train {
        splits: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated architectures, e.g. rnn,bigru,bilstm-3.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        no_baselines: bool,
    },
    /// Score saved models on a test file.
    Evaluate {
        /// Directory of *.model.jsonl files.
        models: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Gold labels as JSON lines with post_id and label.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Compare analytic and numeric gradients on small random networks.
    Gradcheck {
        /// Architectures to check; all eighteen when omitted.
        models: Vec<String>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 2)]
        hidden: usize,
        #[arg(long, default_value = "last-hidden")]
        readout: Readout,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Run every stage from corpus to metrics.
    Run {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with planted labels.
    Synth {
        /// Corpus file; `.csv` and `.tsv` are written delimited, anything
        /// else as JSON lines.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        planted: Option<PathBuf>,
        #[arg(long)]
        posts: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(format) = cli.format {
        config.input.format = format;
    }
    if let Some(d) = cli.delimiter {
        config.input.delimiter = d;
    }
    if let Some(p) = cli.zero_policy {
        config.zero_policy = p;
    }
    if let Some(a) = cli.averaging {
        config.averaging = a;
    }
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut config = load_config(&cli)?;

    match cli.command {
        Command::Stats { corpus, json } => {
            let loaded = load_corpus(&corpus, config.load_options())
                .with_context(|| format!("loading corpus {}", corpus.display()))?;
            let stats = pipeline::reaction_stats(&loaded.corpus)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                let (_, report) = filter_annotatable(&loaded.corpus);
                println!("posts {}", loaded.corpus.len());
                println!(
                    "annotatable {} (empty message {}, no considered reactions {})\n",
                    report.kept, report.empty_message, report.no_considered_reactions
                );
                print!("{}", pipeline::render_stats(&stats));
            }
        }
        Command::Preprocess {
            corpus,
            output,
            stopwords,
        } => {
            config.paths.corpus = Some(corpus);
            if stopwords.is_some() {
                config.paths.stopwords = stopwords;
            }
            config.validate()?;
            let input = pipeline::load_input(&config)?;
            let (cleaned, _) = pipeline::preprocess(&config, &input.corpus)?;
            save_jsonl(&output, Some(&config.meta("cleaned")), &cleaned)?;
        }
        Command::Annotate { cleaned, output } => {
            config.validate()?;
            let (_, posts): (_, Vec<CleanedPost>) =
                load_jsonl(&cleaned).with_context(|| format!("reading {}", cleaned.display()))?;
            let (labeled, h) = pipeline::annotate(&config, &posts)?;
            save_jsonl(&output, Some(&config.meta("labeled")), &labeled)?;
            println!(
                "positive {}  negative {}  dropped {}",
                h.positive, h.negative, h.dropped
            );
        }
        Command::Split { labeled, output } => {
            config.validate()?;
            let (_, posts): (_, Vec<LabeledPost>) =
                load_jsonl(&labeled).with_context(|| format!("reading {}", labeled.display()))?;
            let splits = pipeline::split(&config, &posts)?;
            pipeline::write_splits(&output, &config, &splits)?;
            println!(
                "train {}  val {}  test {}",
                splits.train.len(),
                splits.val.len(),
                splits.test.len()
            );
        }
        Command::Train {
            splits,
            output,
            models,
            embeddings,
            hidden,
            epochs,
            no_baselines,
        } => {
            if let Some(m) = models {
                config.model.architectures = m;
            }
            if embeddings.is_some() {
                config.paths.embeddings = embeddings;
            }
            if let Some(h) = hidden {
                config.model.hidden = h;
            }
            if let Some(e) = epochs {
                config.train.epochs = e;
            }
            if no_baselines {
                config.model.baselines = false;
            }
            config.validate()?;
            let splits: Splits = pipeline::read_splits(&splits)?;
            let models = pipeline::train_all(&config, &splits, &output)?;
            println!(
                "saved {} models to {}",
                models.len(),
                output.join("models").display()
            );
        }
        Command::Evaluate {
            models,
            test,
            output,
            gold,
        } => {
            let models = pipeline::load_models(&models)?;
            let (_, test): (_, Vec<LabeledPost>) =
                load_jsonl(&test).with_context(|| format!("reading {}", test.display()))?;
            let gold = gold.as_deref().map(pipeline::load_gold).transpose()?;
            let records = pipeline::evaluate_models(&config, &models, &test, gold.as_ref())?;
            pipeline::write_metrics(&output, &config, &records)?;
            print!("{}", pipeline::render_metrics(&records, config.averaging));
        }
        Command::Gradcheck {
            models,
            seeds,
            hidden,
            readout,
            tolerance,
        } => gradcheck(&models, seeds, hidden, readout, tolerance)?,
        Command::Run { corpus, output } => {
            if corpus.is_some() {
                config.paths.corpus = corpus;
            }
            if let Some(o) = output {
                config.paths.output = o;
            }
            let summary = pipeline::run(&config)?;
            let (train, val, test) = summary.split_sizes;
            println!(
                "cleaned {}  labeled {}  split {train}/{val}/{test}\n",
                summary.clean.kept,
                summary.labels.labeled()
            );
            print!(
                "{}",
                pipeline::render_metrics(&summary.metrics, config.averaging)
            );
        }
        Command::Synth {
            output,
            planted,
            posts,
        } => {
            let mut synthetic = config.synthetic.clone().unwrap_or_else(|| SyntheticConfig {
                seed: config.seed,
                ..SyntheticConfig::default()
            });
            if let Some(n) = posts {
                synthetic.posts = n;
            }
            config.synthetic = Some(synthetic.clone());
            let generated = generate(&synthetic)?;
            write_synthetic_corpus(&output, &config, &generated.corpus)?;
            if let Some(path) = planted {
                save_jsonl(&path, Some(&config.meta("planted")), &generated.planted)?;
            }
            println!(
                "wrote {} posts to {}",
                generated.corpus.len(),
                output.display()
            );
        }
    }
    Ok(())
}

fn write_synthetic_corpus(
    path: &Path,
    config: &PipelineConfig,
    corpus: &reaction_sentiment::corpus::Corpus,
) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => save_corpus(path, corpus, b',')?,
        Some("tsv") => save_corpus(path, corpus, b'\t')?,
        _ => save_jsonl(path, Some(&config.meta("corpus")), &corpus.posts)?,
    }
    Ok(())
}

fn gradcheck(
    models: &[String],
    seeds: u64,
    hidden: usize,
    readout: Readout,
    tolerance: f64,
) -> Result<()> {
    let specs: Vec<ModelSpec> = if models.is_empty() {
        all_specs(hidden)
    } else {
        models
            .iter()
            .map(|m| {
                m.parse::<ModelSpec>()
                    .map(|s| s.with_hidden(hidden))
                    .map_err(|e| anyhow::anyhow!("model {m:?}: {e}"))
            })
            .collect::<Result<_>>()?
    };
    let mut failed = 0;
    for spec in specs {
        let spec = spec.with_readout(readout);
        let r = pipeline::gradcheck(&spec, 0..seeds)?;
        let ok = r.max_relative_error < tolerance;
        if !ok {
            failed += 1;
        }
        println!(
            "{:<10} max relative error {:.3e}  worst {}  {}",
            spec.to_string(),
            r.max_relative_error,
            r.worst,
            if ok { "ok" } else { "FAIL" }
        );
    }
    if failed > 0 {
        bail!("{failed} architectures exceeded relative error {tolerance:e}");
    }
    Ok(())
}
