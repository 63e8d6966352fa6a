//! Token-averaging baselines.
//!
//! The core reaction set model learns, per token, the mean normalized
//! `(love, wow, sad, angry)` distribution of the training posts that contain
//! it, and predicts a post's distribution as the mean over its known
//! tokens. The star rating model does the same with a single value on a
//! 1..=5 scale, `3 + 2 * sen`. Each token contributes once per post.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotate::SentimentLabel;
use crate::error::{Error, Result};
use crate::persist::{ModelFile, ModelHeader, ModelKind};
use crate::records::{ArtifactMeta, LabeledPost};

fn unique(tokens: &[String]) -> BTreeSet<&str> {
    tokens.iter().map(String::as_str).collect()
}

fn distribution_label(d: &[f64; 4]) -> SentimentLabel {
    if d[0] + d[1] >= d[2] + d[3] {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Negative
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    pub token: String,
    pub vector: [f64; 4],
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenReactionTable {
    entries: BTreeMap<String, TokenDistribution>,
    global_mean: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorePrediction {
    pub distribution: [f64; 4],
    pub label: SentimentLabel,
    /// Whether no token was known and the global mean was used.
    pub fallback: bool,
}

/// Fits the core reaction set table. Posts without a reaction
/// distribution are skipped.
pub fn fit_core(train: &[LabeledPost]) -> Result<TokenReactionTable> {
    let mut sums: BTreeMap<&str, ([f64; 4], usize)> = BTreeMap::new();
    let mut global = [0.0; 4];
    let mut posts = 0usize;
    for post in train {
        let Some(d) = post.distribution else { continue };
        posts += 1;
        for (g, v) in global.iter_mut().zip(d) {
            *g += v;
        }
        for tok in unique(&post.tokens) {
            let entry = sums.entry(tok).or_insert(([0.0; 4], 0));
            for (s, v) in entry.0.iter_mut().zip(d) {
                *s += v;
            }
            entry.1 += 1;
        }
    }
    if posts == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let entries = sums
        .into_iter()
        .map(|(tok, (sum, n))| {
            let vector = sum.map(|s| s / n as f64);
            (
                tok.to_string(),
                TokenDistribution {
                    token: tok.to_string(),
                    vector,
                    support: n,
                },
            )
        })
        .collect();
    Ok(TokenReactionTable {
        entries,
        global_mean: global.map(|g| g / posts as f64),
    })
}

pub fn predict_core(tokens: &[String], table: &TokenReactionTable) -> CorePrediction {
    let mut sum = [0.0; 4];
    let mut known = 0usize;
    for tok in unique(tokens) {
        if let Some(e) = table.entries.get(tok) {
            for (s, v) in sum.iter_mut().zip(e.vector) {
                *s += v;
            }
            known += 1;
        }
    }
    let (distribution, fallback) = if known == 0 {
        (table.global_mean, true)
    } else {
        (sum.map(|s| s / known as f64), false)
    };
    CorePrediction {
        distribution,
        label: distribution_label(&distribution),
        fallback,
    }
}

#[derive(Serialize, Deserialize)]
struct CoreHeader {
    global_mean: [f64; 4],
}

impl TokenReactionTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&TokenDistribution> {
        self.entries.get(token)
    }

    pub fn global_mean(&self) -> [f64; 4] {
        self.global_mean
    }

    pub fn to_file(&self, meta: Option<ArtifactMeta>) -> Result<ModelFile> {
        Ok(ModelFile {
            header: ModelHeader::new(
                ModelKind::Core,
                meta,
                CoreHeader {
                    global_mean: self.global_mean,
                },
            )?,
            records: self
                .entries
                .values()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.header.expect_kind(ModelKind::Core)?;
        let header: CoreHeader = file.header.body()?;
        let rows: Vec<TokenDistribution> = file.decode_records()?;
        Ok(TokenReactionTable {
            entries: rows.into_iter().map(|r| (r.token.clone(), r)).collect(),
            global_mean: header.global_mean,
        })
    }
}

/// Maps net sentiment in `[-1, 1]` onto a `[1, 5]` star value.
pub fn star_from_sen(sen: f64) -> f64 {
    3.0 + 2.0 * sen
}

pub fn star_label(star: f64) -> SentimentLabel {
    if star >= 3.0 {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Negative
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenStar {
    pub token: String,
    pub star: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarModel {
    entries: BTreeMap<String, TokenStar>,
    prior: f64,
}

pub fn fit_star(train: &[LabeledPost]) -> Result<StarModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    let mut total = 0.0;
    for post in train {
        let star = star_from_sen(post.sen);
        total += star;
        for tok in unique(&post.tokens) {
            let e = sums.entry(tok).or_insert((0.0, 0));
            e.0 += star;
            e.1 += 1;
        }
    }
    let entries = sums
        .into_iter()
        .map(|(tok, (sum, n))| {
            (
                tok.to_string(),
                TokenStar {
                    token: tok.to_string(),
                    star: sum / n as f64,
                    support: n,
                },
            )
        })
        .collect();
    Ok(StarModel {
        entries,
        prior: total / train.len() as f64,
    })
}

/// Mean star of the known tokens, or the training prior if none is known.
pub fn predict_star(tokens: &[String], model: &StarModel) -> (f64, SentimentLabel) {
    let mut sum = 0.0;
    let mut known = 0usize;
    for tok in unique(tokens) {
        if let Some(e) = model.entries.get(tok) {
            sum += e.star;
            known += 1;
        }
    }
    let star = if known == 0 {
        model.prior
    } else {
        sum / known as f64
    };
    (star, star_label(star))
}

#[derive(Serialize, Deserialize)]
struct StarHeader {
    prior: f64,
}

impl StarModel {
    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn get(&self, token: &str) -> Option<&TokenStar> {
        self.entries.get(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_file(&self, meta: Option<ArtifactMeta>) -> Result<ModelFile> {
        Ok(ModelFile {
            header: ModelHeader::new(ModelKind::Star, meta, StarHeader { prior: self.prior })?,
            records: self
                .entries
                .values()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.header.expect_kind(ModelKind::Star)?;
        let header: StarHeader = file.header.body()?;
        let rows: Vec<TokenStar> = file.decode_records()?;
        Ok(StarModel {
            entries: rows.into_iter().map(|r| (r.token.clone(), r)).collect(),
            prior: header.prior,
        })
    }
}

/// Always predicts the most frequent training label (Positive on ties).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityClass {
    pub label: SentimentLabel,
}

impl MajorityClass {
    pub fn fit(train: &[LabeledPost]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let positive = train.iter().filter(|p| p.label.is_positive()).count();
        let label = if 2 * positive >= train.len() {
            SentimentLabel::Positive
        } else {
            SentimentLabel::Negative
        };
        Ok(MajorityClass { label })
    }

    pub fn to_file(&self, meta: Option<ArtifactMeta>) -> Result<ModelFile> {
        Ok(ModelFile {
            header: ModelHeader::new(ModelKind::Majority, meta, self)?,
            records: Vec::new(),
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.header.expect_kind(ModelKind::Majority)?;
        file.header.body()
    }
}
