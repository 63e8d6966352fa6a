use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{balanced_class_weights, mix, Classifier, EmbeddingSetup, Example, StepOptions};
use super::optim::Adam;
use super::spec::ModelSpec;
use crate::annotate::SentimentLabel;
use crate::error::{Error, Result};
use crate::eval::{evaluate, Averaging};

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Gradients are rescaled so their global L2 norm is at most this.
    pub clip_norm: f64,
    /// Epochs without a strictly better validation F1 before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Weigh the loss by inverse class frequency.
    pub class_weighted: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 64,
            learning_rate: 1e-3,
            clip_norm: 5.0,
            patience: 3,
            seed: 0,
            class_weighted: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip norm must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss over the epoch's mini-batches.
    pub train_loss: f64,
    pub val_loss: f64,
    /// Weighted F1 on the validation set, in percent.
    pub val_f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Training-set loss before the first update.
    pub initial_loss: f64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub classifier: Classifier,
    pub history: History,
}

/// Tracks the best score and how long it has gone unbeaten.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    best: Option<f64>,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records `score` for `epoch`; true if it beats every earlier score.
    pub fn update(&mut self, epoch: usize, score: f64) -> bool {
        match self.best {
            Some(b) if score <= b => {
                self.stale += 1;
                false
            }
            _ => {
                self.best = Some(score);
                self.best_epoch = epoch;
                self.stale = 0;
                true
            }
        }
    }

    pub fn should_stop(&self) -> bool {
        self.stale >= self.patience
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

type Encoded = Vec<(Vec<usize>, SentimentLabel)>;

fn encode_all(c: &Classifier, set: &[Example]) -> Encoded {
    set.iter().map(|e| (c.encode(&e.tokens), e.label)).collect()
}

fn validation_scores(c: &Classifier, val: &Encoded) -> Result<(f64, f64)> {
    let probs: Vec<f64> = {
        use rayon::prelude::*;
        val.par_iter()
            .map(|(ids, _)| c.probability_ids(ids))
            .collect()
    };
    let gold: Vec<SentimentLabel> = val.iter().map(|(_, l)| *l).collect();
    let preds: Vec<SentimentLabel> = probs
        .iter()
        .map(|&p| super::model::Prediction::from_probability(p).label)
        .collect();
    let report = evaluate("", &preds, &gold, Averaging::Weighted)?;
    Ok((report.f1, super::model::loss(&probs, &gold)))
}

/// Mini-batch Adam with global-norm clipping and early stopping on the
/// validation F1. The returned classifier holds the best-scoring epoch's
/// parameters.
pub fn train(
    spec: &ModelSpec,
    setup: EmbeddingSetup,
    train_set: &[Example],
    val_set: &[Example],
    config: &TrainConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if val_set.is_empty() {
        return Err(Error::EmptyValidationSet);
    }
    let mut model = Classifier::new(spec.clone(), setup, mix(config.seed, INIT_STREAM))?;
    let train_enc = encode_all(&model, train_set);
    let val_enc = encode_all(&model, val_set);
    let weights = config.class_weighted.then(|| {
        let labels: Vec<SentimentLabel> = train_enc.iter().map(|(_, l)| *l).collect();
        balanced_class_weights(&labels)
    });
    let mut history = History {
        initial_loss: model.batch_loss(&train_enc, weights),
        ..History::default()
    };
    let mut adam = Adam::new(model.network.params.len(), config.learning_rate);
    let mut emb_adam = Adam::new(model.embedding.values.len(), config.learning_rate);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix(config.seed, SHUFFLE_STREAM));
    let mut order: Vec<usize> = (0..train_enc.len()).collect();
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best = (model.network.params.clone(), model.embedding.values.clone());
    let dropout = spec.dropout > 0.0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let batch: Encoded = idx.iter().map(|&i| train_enc[i].clone()).collect();
            let opts = StepOptions {
                class_weights: weights,
                dropout_seed: dropout.then(|| {
                    mix(
                        mix(config.seed, DROPOUT_STREAM),
                        ((epoch as u64) << 32) | b as u64,
                    )
                }),
            };
            let mut grads = model.gradients(&batch, opts);
            if !grads.loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            let norm = grads.norm();
            if !norm.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            if norm > config.clip_norm {
                grads.scale(config.clip_norm / norm);
            }
            adam.step(&mut model.network.params, &grads.params);
            if model.embedding.trainable {
                let dim = model.embedding.dim;
                emb_adam.step_rows(&mut model.embedding.values, dim, &grads.embedding);
            }
            loss_sum += grads.loss * batch.len() as f64;
        }
        let (val_f1, val_loss) = validation_scores(&model, &val_enc)?;
        let train_loss = loss_sum / train_enc.len() as f64;
        log::info!("{spec} epoch {epoch}: train loss {train_loss:.4}, val loss {val_loss:.4}, val F1 {val_f1:.2}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_f1,
        });
        if stopper.update(epoch, val_f1) {
            best = (model.network.params.clone(), model.embedding.values.clone());
        }
        if stopper.should_stop() {
            history.stopped_early = epoch < config.epochs;
            break;
        }
    }
    history.best_epoch = stopper.best_epoch();
    model.network.params = best.0;
    model.embedding.values = best.1;
    Ok(TrainedModel {
        classifier: model,
        history,
    })
}
