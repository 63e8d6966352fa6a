use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::spec::ModelSpec;
use super::tensor::Tensor;
use crate::annotate::SentimentLabel;
use crate::embeddings::{encode, EmbeddedSequence, EmbeddingMatrix, Vocabulary, PAD};
use crate::error::{Error, Result};
use crate::persist::{ModelFile, ModelHeader, ModelKind};
use crate::records::{ArtifactMeta, LabeledPost};

/// Probabilities are clamped to `[PROB_EPS, 1 − PROB_EPS]` inside the loss.
pub const PROB_EPS: f64 = 1e-12;

/// Sequences per parallel work unit. Gradients are summed inside a chunk
/// and then across chunks in index order, so results do not depend on the
/// number of threads.
const CHUNK: usize = 8;

/// Binary cross-entropy of one probability against a 0/1 target.
pub fn bce(p: f64, target: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Mean binary cross-entropy.
pub fn loss(probabilities: &[f64], labels: &[SentimentLabel]) -> f64 {
    weighted_loss(probabilities, labels, [1.0, 1.0])
}

/// Mean binary cross-entropy with per-class weights `[positive, negative]`.
pub fn weighted_loss(probabilities: &[f64], labels: &[SentimentLabel], weights: [f64; 2]) -> f64 {
    if probabilities.is_empty() {
        return 0.0;
    }
    let sum: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, l)| class_weight(weights, *l) * bce(p, l.as_target()))
        .sum();
    sum / probabilities.len() as f64
}

pub(crate) fn class_weight(weights: [f64; 2], label: SentimentLabel) -> f64 {
    if label.is_positive() {
        weights[0]
    } else {
        weights[1]
    }
}

/// `N / (2 · n_c)` per class, or 1 for an absent class.
pub fn balanced_class_weights(labels: &[SentimentLabel]) -> [f64; 2] {
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    let w = |c: usize| {
        if c == 0 {
            1.0
        } else {
            labels.len() as f64 / (2.0 * c as f64)
        }
    };
    [w(pos), w(neg)]
}

/// One training or evaluation post.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub tokens: Vec<String>,
    pub label: SentimentLabel,
}

impl From<&LabeledPost> for Example {
    fn from(p: &LabeledPost) -> Self {
        Example {
            tokens: p.tokens.clone(),
            label: p.label,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: SentimentLabel,
    pub probability: f64,
}

impl Prediction {
    /// Positive iff `probability ≥ 0.5`.
    pub fn from_probability(probability: f64) -> Self {
        let label = if probability >= 0.5 {
            SentimentLabel::Positive
        } else {
            SentimentLabel::Negative
        };
        Prediction { label, probability }
    }
}

/// Vocabulary, embeddings and input length limit shared by a classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSetup {
    pub vocab: Vocabulary,
    pub matrix: EmbeddingMatrix,
    pub max_len: usize,
}

/// Embedding lookup followed by a recurrent network.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    pub network: Network,
    pub vocab: Vocabulary,
    pub embedding: EmbeddingMatrix,
    pub max_len: usize,
}

/// Gradient of a batch loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub params: Vec<f64>,
    /// Embedding rows touched by the batch; empty when embeddings are frozen.
    pub embedding: BTreeMap<usize, Vec<f64>>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        let dense: f64 = self.params.iter().map(|g| g * g).sum();
        let sparse: f64 = self.embedding.values().flatten().map(|g| g * g).sum();
        (dense + sparse).sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for g in self
            .params
            .iter_mut()
            .chain(self.embedding.values_mut().flatten())
        {
            *g *= s;
        }
    }

    fn add(&mut self, other: Gradients) {
        self.loss += other.loss;
        for (a, b) in self.params.iter_mut().zip(&other.params) {
            *a += b;
        }
        for (id, row) in other.embedding {
            match self.embedding.get_mut(&id) {
                Some(acc) => {
                    for (a, b) in acc.iter_mut().zip(&row) {
                        *a += b;
                    }
                }
                None => {
                    self.embedding.insert(id, row);
                }
            }
        }
    }
}

/// Settings for one gradient evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepOptions {
    /// `[positive, negative]` loss weights; `None` weighs every post 1.
    pub class_weights: Option<[f64; 2]>,
    /// Enables inter-layer dropout; sequence `i` draws its mask from a
    /// stream derived from this seed and `i`.
    pub dropout_seed: Option<u64>,
}

impl Classifier {
    pub fn new(spec: ModelSpec, setup: EmbeddingSetup, seed: u64) -> Result<Self> {
        let EmbeddingSetup {
            vocab,
            matrix,
            max_len,
        } = setup;
        if matrix.dim == 0 || matrix.rows() != vocab.len() {
            return Err(Error::Shape(format!(
                "embedding matrix has {} rows of width {}, vocabulary has {} entries",
                matrix.rows(),
                matrix.dim,
                vocab.len()
            )));
        }
        if max_len == 0 {
            return Err(Error::InvalidSpec(
                "maximum sequence length must be at least 1".into(),
            ));
        }
        let network = Network::new(spec, matrix.dim, seed)?;
        Ok(Classifier {
            network,
            vocab,
            embedding: matrix,
            max_len,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        self.network.spec()
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        encode(tokens, &self.vocab, self.max_len)
    }

    fn rows(&self, ids: &[usize]) -> Vec<&[f64]> {
        ids.iter().map(|&id| self.embedding.row(id)).collect()
    }

    pub fn probability_ids(&self, ids: &[usize]) -> f64 {
        self.network.probability(&self.rows(ids))
    }

    pub fn logit_ids(&self, ids: &[usize]) -> f64 {
        self.network.logit(&self.rows(ids))
    }

    /// Probabilities for padded sequences; masked positions are skipped.
    pub fn forward(&self, batch: &[EmbeddedSequence]) -> Result<Vec<f64>> {
        batch
            .par_iter()
            .map(|s| {
                if s.dim != self.network.input_dim() || s.values.len() != s.dim * s.mask.len() {
                    return Err(Error::Shape(format!(
                        "sequence of width {} and {} values does not fit input width {}",
                        s.dim,
                        s.values.len(),
                        self.network.input_dim()
                    )));
                }
                let xs: Vec<&[f64]> = (0..s.len())
                    .filter(|&t| s.mask[t])
                    .map(|t| s.row(t))
                    .collect();
                Ok(self.network.probability(&xs))
            })
            .collect()
    }

    pub fn predict_proba(&self, docs: &[Vec<String>]) -> Vec<f64> {
        docs.par_iter()
            .map(|d| self.probability_ids(&self.encode(d)))
            .collect()
    }

    pub fn predict(&self, docs: &[Vec<String>]) -> Vec<Prediction> {
        self.predict_proba(docs)
            .into_iter()
            .map(Prediction::from_probability)
            .collect()
    }

    /// Mean loss over encoded sequences, without dropout.
    pub fn batch_loss(
        &self,
        batch: &[(Vec<usize>, SentimentLabel)],
        class_weights: Option<[f64; 2]>,
    ) -> f64 {
        let probs: Vec<f64> = batch
            .par_iter()
            .map(|(ids, _)| self.probability_ids(ids))
            .collect();
        let labels: Vec<SentimentLabel> = batch.iter().map(|(_, l)| *l).collect();
        weighted_loss(&probs, &labels, class_weights.unwrap_or([1.0, 1.0]))
    }

    /// Mean loss over `batch` and its exact gradient.
    pub fn gradients(
        &self,
        batch: &[(Vec<usize>, SentimentLabel)],
        opts: StepOptions,
    ) -> Gradients {
        let n = batch.len().max(1) as f64;
        let weights = opts.class_weights.unwrap_or([1.0, 1.0]);
        let chunks: Vec<Gradients> = batch
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut acc = Gradients {
                    loss: 0.0,
                    params: vec![0.0; self.network.params.len()],
                    embedding: BTreeMap::new(),
                };
                for (j, (ids, label)) in chunk.iter().enumerate() {
                    let mut rng = opts
                        .dropout_seed
                        .map(|s| ChaCha8Rng::seed_from_u64(mix(s, (c * CHUNK + j) as u64)));
                    let cache = self.network.forward_seq(&self.rows(ids), rng.as_mut());
                    let (p, y) = (cache.prob, label.as_target());
                    let w = class_weight(weights, *label);
                    acc.loss += w * bce(p, y);
                    let dlogit = if (PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                        w * (p - y) / n
                    } else {
                        0.0
                    };
                    let dx = self.network.backward_seq(&cache, dlogit, &mut acc.params);
                    if self.embedding.trainable {
                        for (&id, d) in ids.iter().zip(dx) {
                            if id == PAD {
                                continue;
                            }
                            let row = acc
                                .embedding
                                .entry(id)
                                .or_insert_with(|| vec![0.0; d.len()]);
                            for (a, b) in row.iter_mut().zip(&d) {
                                *a += b;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = Gradients {
            loss: 0.0,
            params: vec![0.0; self.network.params.len()],
            embedding: BTreeMap::new(),
        };
        for g in chunks {
            total.add(g);
        }
        total.loss /= n;
        total
    }

    /// Header with the spec and vocabulary digest, then the vocabulary,
    /// the embedding matrix and every parameter tensor.
    pub fn to_file(&self, meta: Option<ArtifactMeta>) -> Result<ModelFile> {
        let header = ModelHeader::new(
            ModelKind::Neural,
            meta,
            NeuralHeader {
                spec: self.spec().clone(),
                embedding_dim: self.embedding.dim,
                trainable_embeddings: self.embedding.trainable,
                max_len: self.max_len,
                vocab_size: self.vocab.len(),
                vocab_digest: self.vocab.digest(),
            },
        )?;
        let mut records = vec![serde_json::to_value(VocabRecord {
            vocab: self.vocab.words().to_vec(),
        })?];
        let embedding = Tensor::new(
            vec![self.embedding.rows(), self.embedding.dim],
            self.embedding.values.clone(),
        )?;
        records.push(serde_json::to_value(TensorRecord {
            name: "embedding".into(),
            tensor: embedding,
        })?);
        for (name, tensor) in self.network.tensors() {
            records.push(serde_json::to_value(TensorRecord { name, tensor })?);
        }
        Ok(ModelFile { header, records })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.header.expect_kind(ModelKind::Neural)?;
        let h: NeuralHeader = file.header.body()?;
        let (first, rest) = file
            .records
            .split_first()
            .ok_or_else(|| Error::ModelFormat("missing vocabulary record".into()))?;
        let vocab: VocabRecord = serde_json::from_value(first.clone())
            .map_err(|e| Error::ModelFormat(format!("bad vocabulary record: {e}")))?;
        let vocab = Vocabulary::from_tokens(vocab.vocab);
        if vocab.len() != h.vocab_size || vocab.digest() != h.vocab_digest {
            return Err(Error::ModelFormat(
                "vocabulary does not match its recorded digest".into(),
            ));
        }
        let tensors: Vec<TensorRecord> = rest
            .iter()
            .map(|r| {
                serde_json::from_value(r.clone())
                    .map_err(|e| Error::ModelFormat(format!("bad tensor: {e}")))
            })
            .collect::<Result<_>>()?;
        let (emb, params) = tensors
            .split_first()
            .ok_or_else(|| Error::ModelFormat("missing embedding tensor".into()))?;
        if emb.name != "embedding" || emb.tensor.shape != [vocab.len(), h.embedding_dim] {
            return Err(Error::ModelFormat(format!(
                "unexpected tensor {} {:?}",
                emb.name, emb.tensor.shape
            )));
        }
        Tensor::new(emb.tensor.shape.clone(), emb.tensor.values.clone())?;
        let named: Vec<(String, Tensor)> = params
            .iter()
            .map(|r| (r.name.clone(), r.tensor.clone()))
            .collect();
        let network = Network::from_tensors(h.spec, h.embedding_dim, &named)?;
        Ok(Classifier {
            network,
            vocab,
            embedding: EmbeddingMatrix {
                dim: h.embedding_dim,
                values: emb.tensor.values.clone(),
                trainable: h.trainable_embeddings,
            },
            max_len: h.max_len,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct NeuralHeader {
    spec: ModelSpec,
    embedding_dim: usize,
    trainable_embeddings: bool,
    max_len: usize,
    vocab_size: usize,
    vocab_digest: String,
}

#[derive(Serialize, Deserialize)]
struct VocabRecord {
    vocab: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    #[serde(flatten)]
    tensor: Tensor,
}

/// Derives an independent seed from `seed` and `stream` (splitmix64).
pub(crate) fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
