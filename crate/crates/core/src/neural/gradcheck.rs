use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{bce, Classifier, EmbeddingSetup, StepOptions, PROB_EPS};
use super::spec::ModelSpec;
use super::tensor::sigmoid;
use crate::annotate::SentimentLabel;
use crate::embeddings::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-5;
pub const MAX_HIDDEN: usize = 8;
pub const MAX_SEQ_LEN: usize = 5;

/// `|a − n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckScope {
    /// Every recurrent, head and (if trainable) used embedding parameter.
    #[default]
    All,
    /// Only the sigmoid head.
    Head,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
    /// Parameter with the largest error.
    pub worst: String,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

/// Compares the analytic gradient of the mean batch loss with central
/// differences of step `eps`.
pub fn gradient_check(
    model: &Classifier,
    batch: &[(Vec<usize>, SentimentLabel)],
    eps: f64,
    scope: CheckScope,
) -> Result<GradCheckReport> {
    if model.spec().hidden > MAX_HIDDEN {
        return Err(Error::InvalidSpec(format!(
            "gradient checks need hidden ≤ {MAX_HIDDEN}"
        )));
    }
    if batch.iter().any(|(ids, _)| ids.len() > MAX_SEQ_LEN) {
        return Err(Error::InvalidSpec(format!(
            "gradient checks need sequences of ≤ {MAX_SEQ_LEN} tokens"
        )));
    }
    let grads = model.gradients(batch, StepOptions::default());
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        checked: 0,
        worst: String::new(),
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    let record = |report: &mut GradCheckReport, name: &dyn Fn() -> String, a: f64, n: f64| {
        let e = relative_error(a, n);
        report.checked += 1;
        if e > report.max_relative_error || report.worst.is_empty() {
            report.max_relative_error = e;
            report.worst = name();
            report.worst_analytic = a;
            report.worst_numeric = n;
        }
    };

    let start = match scope {
        CheckScope::All => 0,
        CheckScope::Head => model.network.head_offset(),
    };
    for i in start..model.network.params.len() {
        let orig = probe.network.params[i];
        probe.network.params[i] = orig + eps;
        let up = logits(&probe, batch);
        probe.network.params[i] = orig - eps;
        let down = logits(&probe, batch);
        probe.network.params[i] = orig;
        let numeric = loss_difference(&up, &down, batch) / (2.0 * eps);
        record(
            &mut report,
            &|| model.network.parameter_name(i),
            grads.params[i],
            numeric,
        );
    }
    if scope == CheckScope::All && model.embedding.trainable {
        let dim = model.embedding.dim;
        for (&row, g) in &grads.embedding {
            for (j, &analytic) in g.iter().enumerate() {
                let k = row * dim + j;
                let orig = probe.embedding.values[k];
                probe.embedding.values[k] = orig + eps;
                let up = logits(&probe, batch);
                probe.embedding.values[k] = orig - eps;
                let down = logits(&probe, batch);
                probe.embedding.values[k] = orig;
                let numeric = loss_difference(&up, &down, batch) / (2.0 * eps);
                record(
                    &mut report,
                    &|| format!("embedding[{row}][{j}]"),
                    analytic,
                    numeric,
                );
            }
        }
    }
    Ok(report)
}

fn logits(model: &Classifier, batch: &[(Vec<usize>, SentimentLabel)]) -> Vec<f64> {
    batch.iter().map(|(ids, _)| model.logit_ids(ids)).collect()
}

/// Mean loss at logits `a` minus mean loss at logits `b`.
///
/// Computed per example as `ln1p(σ(b')·expm1(a' − b'))`, which equals
/// `softplus(a') − softplus(b')` without subtracting two rounded losses.
pub fn loss_difference(a: &[f64], b: &[f64], batch: &[(Vec<usize>, SentimentLabel)]) -> f64 {
    let clamped = |l: f64| !(PROB_EPS..=1.0 - PROB_EPS).contains(&sigmoid(l));
    let sum: f64 = a
        .iter()
        .zip(b)
        .zip(batch)
        .map(|((&la, &lb), (_, label))| {
            if clamped(la) || clamped(lb) {
                return bce(sigmoid(la), label.as_target()) - bce(sigmoid(lb), label.as_target());
            }
            let s = if label.is_positive() { -1.0 } else { 1.0 };
            (sigmoid(s * lb) * (s * (la - lb)).exp_m1()).ln_1p()
        })
        .sum();
    sum / batch.len().max(1) as f64
}

/// Encoded sequences with their labels.
pub type Batch = Vec<(Vec<usize>, SentimentLabel)>;

/// A random classifier over a six-word vocabulary with trainable width-3
/// embeddings, and a batch of four sequences of 1 to 5 tokens.
pub fn random_instance(spec: &ModelSpec, seed: u64) -> Result<(Classifier, Batch)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::from_tokens(["ක", "ඛ", "ග", "ඝ", "ඞ", "ච"].map(String::from));
    let mut matrix = EmbeddingMatrix::random(vocab.len(), 3, rng.gen());
    for v in matrix.values.iter_mut().skip(3) {
        *v *= 10.0;
    }
    matrix.trainable = true;
    let setup = EmbeddingSetup {
        vocab,
        matrix,
        max_len: MAX_SEQ_LEN,
    };
    let model = Classifier::new(spec.clone(), setup, rng.gen())?;
    let batch = (0..4)
        .map(|_| {
            let len = rng.gen_range(1..=MAX_SEQ_LEN);
            let ids = (0..len)
                .map(|_| rng.gen_range(1..model.vocab.len()))
                .collect();
            let label = if rng.gen() {
                SentimentLabel::Positive
            } else {
                SentimentLabel::Negative
            };
            (ids, label)
        })
        .collect();
    Ok((model, batch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::spec::{all_specs, CellKind};

    #[test]
    fn error_metric() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(1.0, 3.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(1e-10, 0.0) - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn stable_difference_matches_direct() {
        let spec = ModelSpec::new(CellKind::Gru, false, 1).with_hidden(3);
        let (model, batch) = random_instance(&spec, 4).unwrap();
        let mut other = model.clone();
        for p in other.network.params.iter_mut() {
            *p *= 1.3;
        }
        let direct = other.batch_loss(&batch, None) - model.batch_loss(&batch, None);
        let stable = loss_difference(&logits(&other, &batch), &logits(&model, &batch), &batch);
        assert!((direct - stable).abs() < 1e-14, "{direct} {stable}");
        let (a, b) = (logits(&model, &batch), logits(&model, &batch));
        assert_eq!(loss_difference(&a, &b, &batch), 0.0);
    }

    #[test]
    fn head_only_is_tight() {
        for spec in all_specs(4) {
            let (model, batch) = random_instance(&spec, 3).unwrap();
            let r = gradient_check(&model, &batch, DEFAULT_EPS, CheckScope::Head).unwrap();
            assert_eq!(r.checked, spec.output_dim() + 1);
            assert!(r.max_relative_error < 1e-9, "{spec}: {r:?}");
        }
    }

    #[test]
    fn lstm_passes() {
        let spec = ModelSpec::new(CellKind::Lstm, false, 1).with_hidden(4);
        let (model, batch) = random_instance(&spec, 1).unwrap();
        let r = gradient_check(&model, &batch, DEFAULT_EPS, CheckScope::All).unwrap();
        assert!(r.max_relative_error < 1e-4, "{r:?}");
        assert!(r.checked > spec.parameter_count(3));
    }

    #[test]
    fn preconditions() {
        let spec = ModelSpec::new(CellKind::Rnn, false, 1).with_hidden(9);
        let (model, batch) = random_instance(&spec, 1).unwrap();
        assert!(gradient_check(&model, &batch, DEFAULT_EPS, CheckScope::All).is_err());
        let spec = ModelSpec::new(CellKind::Rnn, false, 1).with_hidden(2);
        let (model, _) = random_instance(&spec, 1).unwrap();
        let long = vec![(vec![2; 6], SentimentLabel::Positive)];
        assert!(gradient_check(&model, &long, DEFAULT_EPS, CheckScope::All).is_err());
    }
}
