//! Vocabulary construction, word-vector loading and sequence encoding.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const OOV: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

pub const DEFAULT_DIM: usize = 300;
pub const DEFAULT_MAX_LEN: usize = 128;
/// Half-width of the uniform range used for randomly initialized rows.
pub const INIT_RANGE: f64 = 0.1;

/// Token to index mapping. Indices 0 and 1 are reserved for padding and
/// out-of-vocabulary tokens; real tokens start at 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Tokens occurring at least `min_count` times, most frequent first,
    /// ties broken lexicographically.
    pub fn build<'a, I, D>(docs: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a String>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            for tok in doc {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        let min_count = min_count.max(1);
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string()))
    }

    /// Vocabulary over `tokens` in the given order. Duplicates keep their
    /// first index.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut list = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        let mut index = HashMap::new();
        for tok in tokens {
            if index.contains_key(&tok) {
                continue;
            }
            index.insert(tok.clone(), list.len());
            list.push(tok);
        }
        Vocabulary {
            tokens: list,
            index,
        }
    }

    /// Number of rows including PAD and OOV.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() == 2
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id(&self, token: &str) -> usize {
        self.get(token).unwrap_or(OOV)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Real tokens, in index order starting at 2.
    pub fn words(&self) -> &[String] {
        &self.tokens[2..]
    }

    /// Hex SHA-256 over the real tokens in index order.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for tok in self.words() {
            hasher.update(tok.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// One vector per vocabulary row, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Whether training updates the rows. PAD stays zero regardless.
    pub trainable: bool,
}

impl EmbeddingMatrix {
    /// Uniform in `[-INIT_RANGE, INIT_RANGE]` for every row but PAD.
    pub fn random(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-INIT_RANGE, INIT_RANGE);
        let mut values = vec![0.0; rows * dim];
        for v in values.iter_mut().skip(dim) {
            *v = dist.sample(&mut rng);
        }
        EmbeddingMatrix {
            dim,
            values,
            trainable: false,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.values[id * self.dim..(id + 1) * self.dim]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretrainedReport {
    /// Vectors read from the file.
    pub file_rows: usize,
    /// Vocabulary tokens found in the file.
    pub found: usize,
    /// Vocabulary tokens that were randomly initialized.
    pub missing: usize,
}

/// Reads a text word-vector file (optional `count dim` header, then
/// `token v1 .. vdim` per line) into a matrix aligned with `vocab`.
///
/// Tokens missing from the file get seeded random rows; OOV becomes the
/// mean of every vector in the file; PAD is zero. `dim` of `None` takes
/// the dimension from the file.
pub fn load_pretrained(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    dim: Option<usize>,
    seed: u64,
) -> Result<(EmbeddingMatrix, PretrainedReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pretrained(
        BufReader::new(file),
        &path.display().to_string(),
        vocab,
        dim,
        seed,
    )
}

pub fn read_pretrained(
    reader: impl BufRead,
    source: &str,
    vocab: &Vocabulary,
    dim: Option<usize>,
    seed: u64,
) -> Result<(EmbeddingMatrix, PretrainedReport)> {
    let mut expected = dim;
    let mut found: Vec<Option<Vec<f64>>> = vec![None; vocab.len()];
    let mut sum: Vec<f64> = Vec::new();
    let mut report = PretrainedReport::default();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();

        if line_no == 1 && rest.len() == 1 {
            if let (Ok(_), Ok(header_dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                match expected {
                    Some(d) if d != header_dim => {
                        return Err(Error::DimensionMismatch {
                            line: line_no,
                            expected: d,
                            found: header_dim,
                        })
                    }
                    _ => expected = Some(header_dim),
                }
                continue;
            }
        }

        let d = *expected.get_or_insert(rest.len());
        if rest.len() != d {
            return Err(Error::DimensionMismatch {
                line: line_no,
                expected: d,
                found: rest.len(),
            });
        }
        let vector = rest
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::record(source, line_no, format!("bad vector component: {e}")))?;
        if sum.is_empty() {
            sum = vec![0.0; d];
        }
        for (s, v) in sum.iter_mut().zip(&vector) {
            *s += v;
        }
        report.file_rows += 1;
        if let Some(id) = vocab.get(token) {
            if found[id].is_none() {
                found[id] = Some(vector);
            }
        }
    }

    let dim = expected
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::record(source, 1, "no vectors and no dimension given"))?;
    let mut matrix = EmbeddingMatrix::random(vocab.len(), dim, seed);
    for (id, vector) in found.into_iter().enumerate().skip(2) {
        match vector {
            Some(v) => {
                matrix.row_mut(id).copy_from_slice(&v);
                report.found += 1;
            }
            None => report.missing += 1,
        }
    }
    let oov = matrix.row_mut(OOV);
    if report.file_rows > 0 {
        for (o, s) in oov.iter_mut().zip(&sum) {
            *o = s / report.file_rows as f64;
        }
    }
    Ok((matrix, report))
}

/// Token ids, right-truncated to `max_len`, without padding.
pub fn encode(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> Vec<usize> {
    tokens.iter().take(max_len).map(|t| vocab.id(t)).collect()
}

/// A padded `(max_len, dim)` sequence and its mask.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedSequence {
    pub dim: usize,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl EmbeddedSequence {
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }
}

pub fn embed_sequence(
    tokens: &[String],
    vocab: &Vocabulary,
    matrix: &EmbeddingMatrix,
    max_len: usize,
) -> EmbeddedSequence {
    let dim = matrix.dim;
    let mut values = vec![0.0; max_len * dim];
    let mut mask = vec![false; max_len];
    for (t, id) in encode(tokens, vocab, max_len).into_iter().enumerate() {
        values[t * dim..(t + 1) * dim].copy_from_slice(matrix.row(id));
        mask[t] = true;
    }
    EmbeddedSequence { dim, values, mask }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn vocab_min_count() {
        let docs = [toks("a a b"), toks("a")];
        let v = Vocabulary::build(&docs, 2);
        assert_eq!(v.len(), 3);
        assert_eq!(v.get("a"), Some(2));
        assert_eq!(v.id("b"), OOV);
        let v = Vocabulary::build(&docs, 1);
        assert_eq!(v.words(), ["a", "b"]);
    }

    #[test]
    fn vocab_tie_break() {
        let docs = [toks("d c b a"), toks("c a")];
        let v = Vocabulary::build(&docs, 1);
        assert_eq!(v.words(), ["a", "c", "b", "d"]);
        assert_eq!(v.digest(), Vocabulary::build(&docs, 1).digest());
    }

    #[test]
    fn header_file() {
        let vocab = Vocabulary::from_tokens(toks("x y"));
        let text = "2 3\nx 1 2 3\ny 4 5 6\n";
        let (m, report) = read_pretrained(text.as_bytes(), "v", &vocab, Some(3), 0).unwrap();
        assert_eq!((m.rows(), m.dim), (4, 3));
        assert_eq!(m.row(PAD), [0.0; 3]);
        assert_eq!(m.row(OOV), [2.5, 3.5, 4.5]);
        assert_eq!(m.row(2), [1.0, 2.0, 3.0]);
        assert_eq!(report.found, 2);
    }

    #[test]
    fn missing_token_is_seeded() {
        let vocab = Vocabulary::from_tokens(toks("x z"));
        let text = "x 1 2\n";
        let (a, report) = read_pretrained(text.as_bytes(), "v", &vocab, None, 5).unwrap();
        let (b, _) = read_pretrained(text.as_bytes(), "v", &vocab, None, 5).unwrap();
        assert_eq!(report.missing, 1);
        assert_eq!(a, b);
        assert!(a.row(3).iter().all(|v| v.abs() <= INIT_RANGE));
        assert_ne!(a.row(3), [0.0, 0.0]);
    }

    #[test]
    fn short_row_is_an_error() {
        let vocab = Vocabulary::from_tokens(toks("x"));
        let text = "x 1 2 3\ny 1 2\n";
        let err = read_pretrained(text.as_bytes(), "v", &vocab, Some(3), 0).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                line: 2,
                expected: 3,
                found: 2
            }
        ));
        let err = read_pretrained("1 4\n".as_bytes(), "v", &vocab, Some(3), 0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { line: 1, .. }));
        let err = read_pretrained("x 1 zz\n".as_bytes(), "v", &vocab, None, 0).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn embed_pads_and_truncates() {
        let vocab = Vocabulary::from_tokens(toks("a b"));
        let m = EmbeddingMatrix::random(vocab.len(), 2, 1);
        let e = embed_sequence(&toks("a b"), &vocab, &m, 4);
        assert_eq!(e.mask, [true, true, false, false]);
        assert_eq!(e.row(0), m.row(2));
        assert_eq!(e.row(3), [0.0, 0.0]);
        let e = embed_sequence(&toks("a b a b q a"), &vocab, &m, 4);
        assert_eq!(e.mask, [true; 4]);
        assert_eq!(e.values.len(), 8);
        let e = embed_sequence(&[], &vocab, &m, 4);
        assert!(e.values.iter().all(|&v| v == 0.0));
        assert_eq!(e.mask, [false; 4]);
        assert_eq!(encode(&toks("q a"), &vocab, 8), vec![OOV, 2]);
    }
}
