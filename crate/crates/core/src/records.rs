//! Intermediate pipeline records and their line-oriented JSON files.
//!
//! Artifact files may start with a metadata line `{"meta": {...}}` that
//! carries the seed and config digest of the run that produced them.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::annotate::{ReactionCounts, SentimentLabel};
use crate::corpus::{Corpus, RawPost};
use crate::error::{Error, Result};
use crate::normalize::{normalize, NormalizerConfig};

/// Tokens serialize as one space-joined string.
mod space_joined {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(tokens: &[String], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&tokens.join(" "))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
        let joined = String::deserialize(d)?;
        Ok(joined.split_whitespace().map(str::to_string).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedPost {
    pub post_id: String,
    #[serde(with = "space_joined")]
    pub tokens: Vec<String>,
    #[serde(flatten)]
    pub reactions: ReactionCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPost {
    pub post_id: String,
    #[serde(with = "space_joined")]
    pub tokens: Vec<String>,
    pub sen: f64,
    pub label: SentimentLabel,
    /// Normalized `(love, wow, sad, angry)`; absent for posts without
    /// considered reactions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<[f64; 4]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub kept: usize,
    pub empty_after_cleaning: usize,
}

/// Normalizes every message. Posts left with no tokens are dropped unless
/// `keep_empty` is set.
pub fn clean_corpus(
    corpus: &Corpus,
    config: &NormalizerConfig,
    keep_empty: bool,
) -> (Vec<CleanedPost>, CleanReport) {
    let mut report = CleanReport::default();
    let mut out = Vec::with_capacity(corpus.len());
    for RawPost {
        post_id,
        message,
        reactions,
        ..
    } in &corpus.posts
    {
        let cleaned = normalize(message, config);
        if cleaned.is_empty() && !keep_empty {
            report.empty_after_cleaning += 1;
            continue;
        }
        out.push(CleanedPost {
            post_id: post_id.clone(),
            tokens: cleaned.tokens,
            reactions: *reactions,
        });
    }
    report.kept = out.len();
    (out, report)
}

/// Provenance stamped into every artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub kind: String,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Serialize)]
struct MetaLine<'a> {
    meta: &'a ArtifactMeta,
}

pub fn write_jsonl<T: Serialize>(
    mut writer: impl Write,
    meta: Option<&ArtifactMeta>,
    items: &[T],
) -> Result<()> {
    let io = |e| Error::io("<jsonl>", e);
    if let Some(meta) = meta {
        serde_json::to_writer(&mut writer, &MetaLine { meta })?;
        writer.write_all(b"\n").map_err(io)?;
    }
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n").map_err(io)?;
    }
    writer.flush().map_err(io)
}

pub fn save_jsonl<T: Serialize>(
    path: impl AsRef<Path>,
    meta: Option<&ArtifactMeta>,
    items: &[T],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(BufWriter::new(file), meta, items)
}

/// Reads records, returning the metadata line if one is present.
pub fn read_jsonl<T: DeserializeOwned>(
    reader: impl BufRead,
    source: &str,
) -> Result<(Option<ArtifactMeta>, Vec<T>)> {
    let mut meta = None;
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| Error::record(source, i + 1, e.to_string()))?;
        if let Some(m) = value.get("meta") {
            if items.is_empty() && meta.is_none() {
                meta = Some(
                    serde_json::from_value(m.clone())
                        .map_err(|e| Error::record(source, i + 1, e.to_string()))?,
                );
                continue;
            }
        }
        items.push(
            serde_json::from_value(value)
                .map_err(|e| Error::record(source, i + 1, e.to_string()))?,
        );
    }
    Ok((meta, items))
}

pub fn load_jsonl<T: DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<(Option<ArtifactMeta>, Vec<T>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(file), &path.display().to_string())
}
