//! Pipeline configuration.
//!
//! A TOML file supplies every setting; command-line flags override it.
//! One root seed drives the split, embedding initialization, training and
//! synthetic generation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use reaction_sentiment::annotate::ZeroPolicy;
use reaction_sentiment::corpus::{InputFormat, LoadOptions, SplitSpec};
use reaction_sentiment::eval::Averaging;
use reaction_sentiment::neural::{ModelSpec, Readout, TrainConfig, DEFAULT_HIDDEN};
use reaction_sentiment::normalize::Stages;
use reaction_sentiment::records::ArtifactMeta;
use reaction_sentiment::synthetic::SyntheticConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Text word-vector file; random embeddings when absent.
    pub embeddings: Option<PathBuf>,
    /// JSON lines of `{"post_id", "label"}` to score against instead of
    /// reaction labels.
    pub gold: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub format: InputFormat,
    pub delimiter: char,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            format: InputFormat::Delimited,
            delimiter: ',',
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizerSection {
    #[serde(flatten)]
    pub stages: Stages,
    /// Keep posts whose message cleans to nothing.
    pub keep_empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub dev_test: (u32, u32),
    pub train_val: (u32, u32),
}

impl Default for SplitSection {
    fn default() -> Self {
        let s = SplitSpec::default();
        SplitSection {
            dev_test: s.dev_test,
            train_val: s.train_val,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    /// Width of random embeddings, or the expected width of the vector file.
    pub dim: usize,
    pub min_count: usize,
    pub max_len: usize,
    pub trainable: bool,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            dim: 300,
            min_count: 1,
            max_len: 128,
            trainable: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Architectures such as `rnn`, `bigru` or `bilstm-3`.
    pub architectures: Vec<String>,
    pub hidden: usize,
    pub readout: Readout,
    pub dropout: f64,
    /// Also fit and score the core, star and majority baselines.
    pub baselines: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            architectures: vec!["lstm".into(), "bilstm".into(), "bilstm-3".into()],
            hidden: DEFAULT_HIDDEN,
            readout: Readout::LastHidden,
            dropout: 0.0,
            baselines: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub zero_policy: ZeroPolicy,
    pub averaging: Averaging,
    pub paths: Paths,
    pub input: InputSection,
    pub normalizer: NormalizerSection,
    pub split: SplitSection,
    pub embedding: EmbeddingSection,
    pub model: ModelSection,
    pub train: TrainConfig,
    /// Generate the corpus instead of reading `paths.corpus`.
    pub synthetic: Option<SyntheticConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            zero_policy: ZeroPolicy::Drop,
            averaging: Averaging::Weighted,
            paths: Paths {
                output: PathBuf::from("out"),
                ..Paths::default()
            },
            input: InputSection::default(),
            normalizer: NormalizerSection::default(),
            split: SplitSection::default(),
            embedding: EmbeddingSection::default(),
            model: ModelSection::default(),
            train: TrainConfig::default(),
            synthetic: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut config: PipelineConfig = toml::from_str(text)?;
        config.set_seed(config.seed);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Sets the root seed and every seed derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        if let Some(s) = &mut self.synthetic {
            s.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.split_spec().validate()?;
        self.train.validate()?;
        if self.embedding.dim == 0 {
            bail!("embedding dim must be positive");
        }
        if self.embedding.max_len == 0 {
            bail!("embedding max_len must be positive");
        }
        if !self.input.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        for spec in self.model_specs()? {
            spec.validate()?;
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        Ok(())
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            format: self.input.format,
            delimiter: self.input.delimiter as u8,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            dev_test: self.split.dev_test,
            train_val: self.split.train_val,
            seed: self.seed,
        }
    }

    pub fn model_specs(&self) -> Result<Vec<ModelSpec>> {
        self.model
            .architectures
            .iter()
            .map(|name| {
                let spec: ModelSpec = name
                    .parse()
                    .map_err(|e| anyhow::anyhow!("model {name:?}: {e}"))?;
                Ok(spec
                    .with_hidden(self.model.hidden)
                    .with_readout(self.model.readout)
                    .with_dropout(self.model.dropout))
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON form of the configuration, ignoring
    /// the output directory.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.paths.output = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn meta(&self, kind: &str) -> ArtifactMeta {
        ArtifactMeta {
            kind: kind.to_string(),
            seed: self.seed,
            config_digest: self.digest(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_file() {
        let c = PipelineConfig::from_toml("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn sections_and_seed_propagation() {
        let c = PipelineConfig::from_toml(
            r#"
seed = 7
zero_policy = "positive"
averaging = "macro"
[paths]
corpus = "posts.csv"
output = "runs/a"
[normalizer]
numerics = false
keep_empty = true
[model]
architectures = ["gru", "bilstm-2"]
hidden = 16
readout = "mean-pool"
[train]
epochs = 4
[synthetic]
posts = 300
"#,
        )
        .unwrap();
        assert_eq!(c.train.seed, 7);
        assert_eq!(c.split_spec().seed, 7);
        assert_eq!(c.synthetic.as_ref().unwrap().seed, 7);
        assert!(!c.normalizer.stages.numerics);
        assert!(c.normalizer.stages.patterns);
        let specs = c.model_specs().unwrap();
        assert_eq!(specs[1].to_string(), "bilstm-2");
        assert_eq!(specs[1].hidden, 16);
        assert_eq!(specs[0].readout, Readout::MeanPool);
    }

    #[test]
    fn unknown_keys_and_bad_models_fail() {
        assert!(PipelineConfig::from_toml("sede = 1").is_err());
        let c = PipelineConfig::from_toml("[model]\narchitectures = [\"transformer\"]").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_tracks_settings_not_output() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.paths.output = PathBuf::from("elsewhere");
        assert_eq!(a.digest(), b.digest());
        b.set_seed(1);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
