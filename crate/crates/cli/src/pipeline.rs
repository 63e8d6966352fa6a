//! Pipeline stages and artifact files shared by the subcommands.
//!
//! Every artifact written here carries the run's seed and config digest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use reaction_sentiment::annotate::{annotate_corpus, LabelHistogram, Reaction, SentimentLabel};
use reaction_sentiment::baseline::{
    fit_core, fit_star, predict_core, predict_star, MajorityClass, StarModel, TokenReactionTable,
};
use reaction_sentiment::corpus::{
    compute_reaction_stats, load_corpus, split_items, Corpus, CorpusStats, SplitManifest,
};
use reaction_sentiment::embeddings::{load_pretrained, EmbeddingMatrix, Vocabulary};
use reaction_sentiment::eval::{compare, evaluate, Averaging, MetricsReport};
use reaction_sentiment::neural::{
    gradient_check, random_instance, train, CheckScope, Classifier, EmbeddingSetup, Example,
    GradCheckReport, History, ModelSpec, TrainedModel, DEFAULT_EPS,
};
use reaction_sentiment::normalize::{NormalizerConfig, Stopwords};
use reaction_sentiment::persist::{ModelFile, ModelKind};
use reaction_sentiment::records::{
    clean_corpus, load_jsonl, save_jsonl, ArtifactMeta, CleanReport, CleanedPost, LabeledPost,
};
use reaction_sentiment::synthetic::{generate, PlantedLabel};

use crate::config::PipelineConfig;

pub const MODEL_SUFFIX: &str = ".model.jsonl";

/// A loaded or generated corpus, with gold labels when available.
pub struct Input {
    pub corpus: Corpus,
    pub gold: Option<BTreeMap<String, SentimentLabel>>,
    pub planted: Option<Vec<PlantedLabel>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GoldLabel {
    post_id: String,
    label: SentimentLabel,
}

pub fn load_gold(path: &Path) -> Result<BTreeMap<String, SentimentLabel>> {
    let (_, labels): (_, Vec<GoldLabel>) =
        load_jsonl(path).with_context(|| format!("reading gold labels {}", path.display()))?;
    Ok(labels.into_iter().map(|g| (g.post_id, g.label)).collect())
}

pub fn load_input(config: &PipelineConfig) -> Result<Input> {
    let mut input = if let Some(path) = &config.paths.corpus {
        let loaded = load_corpus(path, config.load_options())
            .with_context(|| format!("loading corpus {}", path.display()))?;
        Input {
            corpus: loaded.corpus,
            gold: None,
            planted: None,
        }
    } else if let Some(synthetic) = &config.synthetic {
        let generated = generate(synthetic)?;
        let gold = generated
            .planted
            .iter()
            .map(|p| (p.post_id.clone(), p.label))
            .collect();
        Input {
            corpus: generated.corpus,
            gold: Some(gold),
            planted: Some(generated.planted),
        }
    } else {
        bail!("no corpus given: set paths.corpus or add a [synthetic] section");
    };
    if let Some(path) = &config.paths.gold {
        input.gold = Some(load_gold(path)?);
    }
    if input.corpus.is_empty() {
        bail!("corpus {} has no posts", input.corpus.provenance);
    }
    Ok(input)
}

pub fn normalizer(config: &PipelineConfig) -> Result<NormalizerConfig> {
    let stopwords = match &config.paths.stopwords {
        Some(path) => Stopwords::from_path(path)
            .with_context(|| format!("reading stopwords {}", path.display()))?,
        None => Stopwords::default(),
    };
    Ok(NormalizerConfig {
        stopwords,
        stages: config.normalizer.stages,
    })
}

pub fn preprocess(
    config: &PipelineConfig,
    corpus: &Corpus,
) -> Result<(Vec<CleanedPost>, CleanReport)> {
    let normalizer = normalizer(config)?;
    let (cleaned, report) = clean_corpus(corpus, &normalizer, config.normalizer.keep_empty);
    info!(
        "cleaned {} posts, {} empty after cleaning",
        report.kept, report.empty_after_cleaning
    );
    Ok((cleaned, report))
}

pub fn annotate(
    config: &PipelineConfig,
    cleaned: &[CleanedPost],
) -> Result<(Vec<LabeledPost>, LabelHistogram)> {
    let (labeled, histogram) = annotate_corpus(cleaned, config.zero_policy)?;
    info!(
        "labeled {} positive, {} negative, dropped {}",
        histogram.positive, histogram.negative, histogram.dropped
    );
    Ok((labeled, histogram))
}

pub struct Splits {
    pub train: Vec<LabeledPost>,
    pub val: Vec<LabeledPost>,
    pub test: Vec<LabeledPost>,
}

impl Splits {
    pub fn manifest(&self, config: &PipelineConfig) -> SplitManifest {
        let ids = |posts: &[LabeledPost]| posts.iter().map(|p| p.post_id.clone()).collect();
        SplitManifest::new(
            &config.split_spec(),
            ids(&self.train),
            ids(&self.val),
            ids(&self.test),
        )
    }
}

pub fn split(config: &PipelineConfig, labeled: &[LabeledPost]) -> Result<Splits> {
    let (train, val, test) = split_items(labeled, &config.split_spec())?;
    info!("split {} / {} / {}", train.len(), val.len(), test.len());
    Ok(Splits { train, val, test })
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    meta: ArtifactMeta,
    #[serde(flatten)]
    manifest: SplitManifest,
}

pub fn write_splits(dir: &Path, config: &PipelineConfig, splits: &Splits) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, posts) in [
        ("train", &splits.train),
        ("val", &splits.val),
        ("test", &splits.test),
    ] {
        save_jsonl(
            dir.join(format!("{name}.jsonl")),
            Some(&config.meta(name)),
            posts,
        )?;
    }
    let file = ManifestFile {
        meta: config.meta("split-manifest"),
        manifest: splits.manifest(config),
    };
    write_json(&dir.join("manifest.json"), &file)
}

pub fn read_splits(dir: &Path) -> Result<Splits> {
    let read = |name: &str| -> Result<Vec<LabeledPost>> {
        let path = dir.join(format!("{name}.jsonl"));
        Ok(load_jsonl(&path)
            .with_context(|| format!("reading split {}", path.display()))?
            .1)
    };
    Ok(Splits {
        train: read("train")?,
        val: read("val")?,
        test: read("test")?,
    })
}

/// A fitted model of any kind.
pub enum Model {
    Core(TokenReactionTable),
    Star(StarModel),
    Majority(MajorityClass),
    Neural(Box<Classifier>),
}

impl Model {
    pub fn predict(&self, docs: &[Vec<String>]) -> Vec<SentimentLabel> {
        match self {
            Model::Core(table) => docs.iter().map(|d| predict_core(d, table).label).collect(),
            Model::Star(star) => docs.iter().map(|d| predict_star(d, star).1).collect(),
            Model::Majority(m) => vec![m.label; docs.len()],
            Model::Neural(c) => c.predict(docs).into_iter().map(|p| p.label).collect(),
        }
    }

    pub fn to_file(&self, meta: ArtifactMeta) -> Result<ModelFile> {
        let meta = Some(meta);
        Ok(match self {
            Model::Core(t) => t.to_file(meta)?,
            Model::Star(s) => s.to_file(meta)?,
            Model::Majority(m) => m.to_file(meta)?,
            Model::Neural(c) => c.to_file(meta)?,
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        Ok(match file.header.kind {
            ModelKind::Core => Model::Core(TokenReactionTable::from_file(file)?),
            ModelKind::Star => Model::Star(StarModel::from_file(file)?),
            ModelKind::Majority => Model::Majority(MajorityClass::from_file(file)?),
            ModelKind::Neural => Model::Neural(Box::new(Classifier::from_file(file)?)),
        })
    }

    /// Table name of the model.
    pub fn display_name(&self) -> String {
        match self {
            Model::Core(_) => "Core reaction set".into(),
            Model::Star(_) => "Star rating".into(),
            Model::Majority(_) => "Majority class".into(),
            Model::Neural(c) => c.spec().display_name(),
        }
    }
}

/// A model and the file stem it is stored under.
pub struct NamedModel {
    pub id: String,
    pub model: Model,
}

pub fn fit_baselines(train: &[LabeledPost]) -> Result<Vec<NamedModel>> {
    Ok(vec![
        NamedModel {
            id: "core".into(),
            model: Model::Core(fit_core(train)?),
        },
        NamedModel {
            id: "star".into(),
            model: Model::Star(fit_star(train)?),
        },
        NamedModel {
            id: "majority".into(),
            model: Model::Majority(MajorityClass::fit(train)?),
        },
    ])
}

/// Vocabulary from the training tokens plus pretrained or random vectors.
pub fn embedding_setup(config: &PipelineConfig, train: &[LabeledPost]) -> Result<EmbeddingSetup> {
    let e = &config.embedding;
    let vocab = Vocabulary::build(train.iter().map(|p| &p.tokens), e.min_count);
    let mut matrix = match &config.paths.embeddings {
        Some(path) => {
            let (matrix, report) = load_pretrained(path, &vocab, Some(e.dim), config.seed)
                .with_context(|| format!("loading embeddings {}", path.display()))?;
            info!(
                "embeddings: {} of {} vocabulary tokens found, {} random",
                report.found,
                vocab.len() - 2,
                report.missing
            );
            matrix
        }
        None => EmbeddingMatrix::random(vocab.len(), e.dim, config.seed),
    };
    matrix.trainable = e.trainable;
    Ok(EmbeddingSetup {
        vocab,
        matrix,
        max_len: e.max_len,
    })
}

pub fn train_neural(
    config: &PipelineConfig,
    spec: &ModelSpec,
    setup: EmbeddingSetup,
    splits: &Splits,
) -> Result<TrainedModel> {
    let examples = |posts: &[LabeledPost]| posts.iter().map(Example::from).collect::<Vec<_>>();
    info!(
        "training {spec} ({} parameters)",
        spec.parameter_count(setup.matrix.dim)
    );
    let trained = train(
        spec,
        setup,
        &examples(&splits.train),
        &examples(&splits.val),
        &config.train,
    )
    .with_context(|| format!("training {spec}"))?;
    Ok(trained)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Labels derived from the reactions on each post.
    Reactions,
    /// Labels from a gold file or the synthetic generator.
    Gold,
}

/// One model's test metrics with the run's provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub id: String,
    pub labels: LabelSource,
    pub seed: u64,
    pub config_digest: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}

/// Scores every model on `test` against reaction labels, and against
/// `gold` when given.
pub fn evaluate_models(
    config: &PipelineConfig,
    models: &[NamedModel],
    test: &[LabeledPost],
    gold: Option<&BTreeMap<String, SentimentLabel>>,
) -> Result<Vec<MetricsRecord>> {
    let docs: Vec<Vec<String>> = test.iter().map(|p| p.tokens.clone()).collect();
    let mut targets = vec![(
        LabelSource::Reactions,
        test.iter().map(|p| p.label).collect::<Vec<_>>(),
    )];
    if let Some(gold) = gold {
        let labels = test
            .iter()
            .map(|p| {
                gold.get(&p.post_id)
                    .copied()
                    .with_context(|| format!("no gold label for post {}", p.post_id))
            })
            .collect::<Result<Vec<_>>>()?;
        targets.push((LabelSource::Gold, labels));
    }
    let digest = config.digest();
    let mut records = Vec::new();
    for m in models {
        let predictions = m.model.predict(&docs);
        for (source, labels) in &targets {
            let report = evaluate(
                &m.model.display_name(),
                &predictions,
                labels,
                config.averaging,
            )?;
            records.push(MetricsRecord {
                id: m.id.clone(),
                labels: *source,
                seed: config.seed,
                config_digest: digest.clone(),
                report,
            });
        }
    }
    Ok(records)
}

/// Comparison tables, one per label source, each under a provenance line.
pub fn render_metrics(records: &[MetricsRecord], averaging: Averaging) -> String {
    let mut out = String::new();
    for source in [LabelSource::Reactions, LabelSource::Gold] {
        let rows: Vec<MetricsReport> = records
            .iter()
            .filter(|r| r.labels == source)
            .map(|r| r.report.clone())
            .collect();
        let Some(first) = records.iter().find(|r| r.labels == source) else {
            continue;
        };
        if !out.is_empty() {
            out.push('\n');
        }
        let source = match source {
            LabelSource::Reactions => "reactions",
            LabelSource::Gold => "gold",
        };
        let _ = writeln!(
            out,
            "# labels={source} averaging={averaging} seed={} config={}",
            first.seed, first.config_digest
        );
        out.push_str(&compare(&rows).render());
    }
    out
}

pub fn write_metrics(dir: &Path, config: &PipelineConfig, records: &[MetricsRecord]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    save_jsonl(
        dir.join("metrics.jsonl"),
        Some(&config.meta("metrics")),
        records,
    )?;
    let table = render_metrics(records, config.averaging);
    fs::write(dir.join("table.txt"), table).with_context(|| format!("writing {}", dir.display()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistoryFile {
    pub meta: ArtifactMeta,
    pub model: String,
    pub history: History,
}

pub fn save_model(dir: &Path, config: &PipelineConfig, m: &NamedModel) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{}{MODEL_SUFFIX}", m.id));
    m.model.to_file(config.meta("model"))?.save(&path)?;
    Ok(path)
}

/// Every `*.model.jsonl` in `dir`, by file name.
pub fn load_models(dir: &Path) -> Result<Vec<NamedModel>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading model directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(MODEL_SUFFIX))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no *{MODEL_SUFFIX} files in {}", dir.display());
    }
    paths
        .iter()
        .map(|path| {
            let file = ModelFile::load(path)?;
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            Ok(NamedModel {
                id: name.trim_end_matches(MODEL_SUFFIX).to_string(),
                model: Model::from_file(&file)
                    .with_context(|| format!("loading model {}", path.display()))?,
            })
        })
        .collect()
}

/// Fits the baselines (if enabled) and trains every configured network,
/// saving models and training histories under `dir`.
pub fn train_all(config: &PipelineConfig, splits: &Splits, dir: &Path) -> Result<Vec<NamedModel>> {
    let mut models = Vec::new();
    if config.model.baselines {
        models.extend(fit_baselines(&splits.train)?);
    }
    let history_dir = dir.join("history");
    let specs = config.model_specs()?;
    let setup = if specs.is_empty() {
        None
    } else {
        Some(embedding_setup(config, &splits.train)?)
    };
    for spec in &specs {
        let setup = setup.clone().expect("built for a non-empty model list");
        let trained = train_neural(config, spec, setup, splits)?;
        let id = spec.to_string();
        fs::create_dir_all(&history_dir)?;
        write_json(
            &history_dir.join(format!("{id}.json")),
            &HistoryFile {
                meta: config.meta("history"),
                model: id.clone(),
                history: trained.history,
            },
        )?;
        models.push(NamedModel {
            id,
            model: Model::Neural(Box::new(trained.classifier)),
        });
    }
    let model_dir = dir.join("models");
    for m in &models {
        save_model(&model_dir, config, m)?;
    }
    Ok(models)
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub clean: CleanReport,
    pub labels: LabelHistogram,
    pub split_sizes: (usize, usize, usize),
    pub metrics: Vec<MetricsRecord>,
}

#[derive(Serialize)]
struct ConfigFile<'a> {
    meta: ArtifactMeta,
    config: &'a PipelineConfig,
}

/// The whole pipeline, writing every artifact under `paths.output`:
///
/// ```text
/// config.json
/// synthetic/{corpus,planted}.jsonl   (generated corpora only)
/// cleaned.jsonl  labeled.jsonl
/// splits/{train,val,test}.jsonl  splits/manifest.json
/// models/<id>.model.jsonl  history/<id>.json
/// metrics.jsonl  table.txt
/// ```
pub fn run(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let out = &config.paths.output;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(
        &out.join("config.json"),
        &ConfigFile {
            meta: config.meta("config"),
            config,
        },
    )?;

    let input = load_input(config)?;
    if let Some(planted) = &input.planted {
        let dir = out.join("synthetic");
        fs::create_dir_all(&dir)?;
        save_jsonl(
            dir.join("corpus.jsonl"),
            Some(&config.meta("corpus")),
            &input.corpus.posts,
        )?;
        save_jsonl(
            dir.join("planted.jsonl"),
            Some(&config.meta("planted")),
            planted,
        )?;
    }

    let (cleaned, clean) = preprocess(config, &input.corpus)?;
    save_jsonl(
        out.join("cleaned.jsonl"),
        Some(&config.meta("cleaned")),
        &cleaned,
    )?;
    let (labeled, labels) = annotate(config, &cleaned)?;
    save_jsonl(
        out.join("labeled.jsonl"),
        Some(&config.meta("labeled")),
        &labeled,
    )?;

    let splits = split(config, &labeled)?;
    write_splits(&out.join("splits"), config, &splits)?;

    let models = train_all(config, &splits, out)?;
    let metrics = evaluate_models(config, &models, &splits.test, input.gold.as_ref())?;
    write_metrics(out, config, &metrics)?;
    Ok(RunSummary {
        clean,
        labels,
        split_sizes: (splits.train.len(), splits.val.len(), splits.test.len()),
        metrics,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn reaction_stats(corpus: &Corpus) -> Result<CorpusStats> {
    let stats = compute_reaction_stats(corpus)?;
    if stats.considered_total() == 0 {
        warn!(
            "no love, wow, sad or angry reactions in {}",
            corpus.provenance
        );
    }
    Ok(stats)
}

/// Reaction totals with their share of all reactions and of the four
/// considered reactions.
pub fn render_stats(stats: &CorpusStats) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9}  {:>12}  {:>9}  {:>10}",
        "Reaction", "Count", "All %", "Filtered %"
    );
    let _ = writeln!(out, "{}", "-".repeat(46));
    for r in Reaction::ALL {
        let filtered = stats
            .filtered_percentage(r)
            .map_or_else(|| "-".to_string(), |p| format!("{p:.2}"));
        let _ = writeln!(
            out,
            "{:<9}  {:>12}  {:>9.2}  {:>10}",
            r.name(),
            stats.total(r),
            stats.original_percentage(r),
            filtered
        );
    }
    let _ = writeln!(out, "{}", "-".repeat(46));
    let _ = writeln!(out, "{:<9}  {:>12}", "total", stats.grand_total());
    let _ = writeln!(out, "{:<9}  {:>12}", "filtered", stats.considered_total());
    out
}

/// Worst gradient-check result over `seeds` random instances of `spec`.
pub fn gradcheck(spec: &ModelSpec, seeds: std::ops::Range<u64>) -> Result<GradCheckReport> {
    let mut worst: Option<GradCheckReport> = None;
    for seed in seeds {
        let (model, batch) = random_instance(spec, seed)?;
        let report = gradient_check(&model, &batch, DEFAULT_EPS, CheckScope::All)?;
        if worst
            .as_ref()
            .is_none_or(|w| report.max_relative_error > w.max_relative_error)
        {
            worst = Some(report);
        }
    }
    worst.context("no seeds to check")
}
