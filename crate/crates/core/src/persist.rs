//! Model files.
//!
//! Every model is stored as line-delimited JSON: a header object naming the
//! format, version and model kind, followed by kind-specific records (table
//! rows for the baselines, vocabulary and parameter tensors for neural
//! models).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::records::ArtifactMeta;

pub const FORMAT: &str = "reaction-sentiment-model";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Core,
    Star,
    Majority,
    Neural,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ArtifactMeta>,
    /// Kind-specific settings.
    pub body: Value,
}

impl ModelHeader {
    pub fn new(kind: ModelKind, meta: Option<ArtifactMeta>, body: impl Serialize) -> Result<Self> {
        Ok(ModelHeader {
            format: FORMAT.to_string(),
            version: VERSION,
            kind,
            meta,
            body: serde_json::to_value(body)?,
        })
    }

    pub fn body<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.body.clone())
            .map_err(|e| Error::ModelFormat(format!("bad {:?} header: {e}", self.kind)))
    }

    pub fn expect_kind(&self, kind: ModelKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::ModelFormat(format!(
                "expected a {kind:?} model, found {:?}",
                self.kind
            )))
        }
    }
}

/// Header line plus records.
pub struct ModelFile {
    pub header: ModelHeader,
    pub records: Vec<Value>,
}

impl ModelFile {
    pub fn write(&self, mut writer: impl Write) -> Result<()> {
        let io = |e| Error::io("<model>", e);
        serde_json::to_writer(&mut writer, &self.header)?;
        writer.write_all(b"\n").map_err(io)?;
        for r in &self.records {
            serde_json::to_writer(&mut writer, r)?;
            writer.write_all(b"\n").map_err(io)?;
        }
        writer.flush().map_err(io)
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::ModelFormat("empty model file".into()))?
            .map_err(|e| Error::io("<model>", e))?;
        let header: ModelHeader = serde_json::from_str(&first)
            .map_err(|e| Error::ModelFormat(format!("unreadable header: {e}")))?;
        if header.format != FORMAT {
            return Err(Error::ModelFormat(format!(
                "unknown format {:?}",
                header.format
            )));
        }
        if header.version != VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (this build reads {VERSION})",
                header.version
            )));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<model>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::ModelFormat(format!("line {}: {e}", i + 2)))?,
            );
        }
        Ok(ModelFile { header, records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    pub fn decode_records<T: DeserializeOwned>(&self) -> Result<Vec<T>> {
        self.records
            .iter()
            .map(|r| {
                serde_json::from_value(r.clone())
                    .map_err(|e| Error::ModelFormat(format!("bad record: {e}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_version() {
        let header = ModelHeader {
            version: 99,
            ..ModelHeader::new(ModelKind::Majority, None, serde_json::json!({})).unwrap()
        };
        let file = ModelFile {
            header,
            records: vec![],
        };
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        let err = ModelFile::read(buf.as_slice()).err().unwrap();
        assert!(err.to_string().contains("version 99"));
        assert!(ModelFile::read("".as_bytes()).is_err());
        assert!(ModelFile::read("{\"format\":\"other\"}".as_bytes()).is_err());
    }
}
