//! Loading, summarizing, filtering and splitting reaction-annotated posts.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::annotate::{Reaction, ReactionCounts};
use crate::error::{Error, Result};

/// Field names of the input schema, in canonical column order.
pub const FIELDS: [&str; 11] = [
    "post_id",
    "page_id",
    "created_time",
    "message",
    "like",
    "love",
    "wow",
    "haha",
    "sad",
    "angry",
    "thankful",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub post_id: String,
    pub page_id: String,
    pub created_time: String,
    pub message: String,
    #[serde(flatten)]
    pub reactions: ReactionCounts,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub posts: Vec<RawPost>,
    pub provenance: String,
}

impl Corpus {
    /// Builds a corpus, rejecting empty or duplicate post ids.
    pub fn new(posts: Vec<RawPost>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(posts.len());
        for p in &posts {
            if p.post_id.is_empty() {
                return Err(Error::EmptyPostId);
            }
            if !seen.insert(p.post_id.as_str()) {
                return Err(Error::DuplicatePostId(p.post_id.clone()));
            }
        }
        Ok(Corpus {
            posts,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// Header row plus delimiter-separated rows.
    #[default]
    Delimited,
    /// One JSON object per line.
    JsonLines,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "delimited" | "csv" | "tsv" => Ok(InputFormat::Delimited),
            "jsonl" | "json-lines" | "ndjson" => Ok(InputFormat::JsonLines),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub format: InputFormat,
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            format: InputFormat::Delimited,
            delimiter: b',',
        }
    }
}

/// A loaded corpus with non-fatal findings.
#[derive(Clone, Debug, Default)]
pub struct Loaded {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

pub fn load_corpus(path: impl AsRef<Path>, options: LoadOptions) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), &path.display().to_string(), options)
}

/// Writes `corpus` as a header row plus one delimited row per post, in
/// [`FIELDS`] order.
pub fn write_corpus(writer: impl Write, corpus: &Corpus, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    w.write_record(FIELDS)?;
    for p in &corpus.posts {
        let mut row = vec![
            p.post_id.clone(),
            p.page_id.clone(),
            p.created_time.clone(),
            p.message.clone(),
        ];
        row.extend(
            Reaction::ALL
                .iter()
                .map(|&r| p.reactions.get(r).to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<corpus>", e))
}

pub fn save_corpus(path: impl AsRef<Path>, corpus: &Corpus, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(std::io::BufWriter::new(file), corpus, delimiter)
}

/// Reads a corpus from any reader; `source` names it in errors and provenance.
pub fn read_corpus(reader: impl Read, source: &str, options: LoadOptions) -> Result<Loaded> {
    let (posts, mut warnings) = match options.format {
        InputFormat::Delimited => read_delimited(reader, source, options.delimiter)?,
        InputFormat::JsonLines => read_json_lines(BufReader::new(reader), source)?,
    };
    if posts.is_empty() {
        warnings.push(format!("{source}: no records"));
    }
    for w in &warnings {
        warn!("{w}");
    }
    let corpus = Corpus::new(posts, source)?;
    Ok(Loaded { corpus, warnings })
}

fn parse_count(raw: &str, field: &str, source: &str, line: usize) -> Result<u64> {
    let raw = raw.trim();
    let value: i128 = raw
        .parse()
        .map_err(|_| Error::record(source, line, format!("invalid {field} count {raw:?}")))?;
    if value < 0 {
        return Err(Error::record(
            source,
            line,
            format!("negative reaction count at row {line} ({field} = {value})"),
        ));
    }
    u64::try_from(value)
        .map_err(|_| Error::record(source, line, format!("{field} count out of range")))
}

fn post_from_fields(
    get: impl Fn(&str) -> Option<String>,
    source: &str,
    line: usize,
) -> Result<RawPost> {
    let text = |field: &str| {
        get(field).ok_or_else(|| {
            Error::record(
                source,
                line,
                format!("missing field {field:?} at row {line}"),
            )
        })
    };
    let mut reactions = ReactionCounts::default();
    for reaction in Reaction::ALL {
        let raw = text(reaction.name())?;
        reactions.set(reaction, parse_count(&raw, reaction.name(), source, line)?);
    }
    let post_id = text("post_id")?;
    if post_id.is_empty() {
        return Err(Error::record(
            source,
            line,
            format!("empty post_id at row {line}"),
        ));
    }
    Ok(RawPost {
        post_id,
        page_id: text("page_id")?,
        created_time: text("created_time")?,
        message: text("message")?,
        reactions,
    })
}

fn read_delimited(
    reader: impl Read,
    source: &str,
    delimiter: u8,
) -> Result<(Vec<RawPost>, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(e.into()),
        Err(e) => return Err(Error::record(source, 1, e.to_string())),
    };
    let mut warnings = Vec::new();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok((Vec::new(), warnings));
    }
    let columns: BTreeMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    for field in FIELDS {
        if !columns.contains_key(field) {
            return Err(Error::record(
                source,
                1,
                format!("header lacks field {field:?}"),
            ));
        }
    }
    let extra: Vec<&str> = columns
        .keys()
        .copied()
        .filter(|h| !FIELDS.contains(h))
        .collect();
    if !extra.is_empty() {
        warnings.push(format!("{source}: ignoring extra columns {extra:?}"));
    }

    let mut posts = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::record(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let post = post_from_fields(
            |f| {
                columns
                    .get(f)
                    .and_then(|&i| record.get(i))
                    .map(str::to_string)
            },
            source,
            line,
        )?;
        posts.push(post);
    }
    Ok((posts, warnings))
}

fn json_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

fn read_json_lines(reader: impl BufRead, source: &str) -> Result<(Vec<RawPost>, Vec<String>)> {
    let mut posts = Vec::new();
    let mut warnings = Vec::new();
    let mut extra_seen = std::collections::BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::record(source, line_no, format!("unparseable record: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::record(source, line_no, "record is not an object"))?;
        if posts.is_empty() && obj.len() == 1 && obj.contains_key("meta") {
            continue;
        }
        for key in obj.keys() {
            if !FIELDS.contains(&key.as_str()) {
                extra_seen.insert(key.clone());
            }
        }
        let post = post_from_fields(|f| obj.get(f).and_then(json_text), source, line_no)?;
        posts.push(post);
    }
    if !extra_seen.is_empty() {
        warnings.push(format!("{source}: ignoring extra fields {extra_seen:?}"));
    }
    Ok((posts, warnings))
}

/// Reaction totals with their share of all reactions and of the four
/// considered reactions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub totals: ReactionCounts,
}

impl CorpusStats {
    pub fn from_totals(totals: ReactionCounts) -> Self {
        CorpusStats { totals }
    }

    pub fn total(&self, reaction: Reaction) -> u64 {
        self.totals.get(reaction)
    }

    pub fn grand_total(&self) -> u128 {
        Reaction::ALL
            .iter()
            .map(|&r| self.totals.get(r) as u128)
            .sum()
    }

    pub fn considered_total(&self) -> u128 {
        Reaction::CONSIDERED
            .iter()
            .map(|&r| self.totals.get(r) as u128)
            .sum()
    }

    /// Percentage of all seven reactions. Zero when there are no reactions.
    pub fn original_percentage(&self, reaction: Reaction) -> f64 {
        percentage(self.total(reaction), self.grand_total())
    }

    /// Percentage of love + wow + sad + angry; `None` for excluded reactions.
    pub fn filtered_percentage(&self, reaction: Reaction) -> Option<f64> {
        reaction
            .is_considered()
            .then(|| percentage(self.total(reaction), self.considered_total()))
    }
}

fn percentage(part: u64, whole: u128) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn compute_reaction_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut totals = ReactionCounts::default();
    for post in &corpus.posts {
        for r in Reaction::ALL {
            let sum = totals
                .get(r)
                .checked_add(post.reactions.get(r))
                .ok_or(Error::CountOverflow)?;
            totals.set(r, sum);
        }
    }
    Ok(CorpusStats { totals })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub empty_message: usize,
    pub no_considered_reactions: usize,
}

/// Keeps posts with a non-empty message and at least one considered
/// reaction. A post failing both checks is counted as an empty message.
pub fn filter_annotatable(corpus: &Corpus) -> (Corpus, FilterReport) {
    let mut report = FilterReport::default();
    let mut posts = Vec::with_capacity(corpus.len());
    for post in &corpus.posts {
        if post.message.trim().is_empty() {
            report.empty_message += 1;
        } else if post.reactions.considered_total().map_or(true, |t| t == 0) {
            report.no_considered_reactions += 1;
        } else {
            posts.push(post.clone());
        }
    }
    report.kept = posts.len();
    let filtered = Corpus {
        posts,
        provenance: corpus.provenance.clone(),
    };
    (filtered, report)
}

/// Two-stage holdout: dev:test, then dev split into train:val.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub dev_test: (u32, u32),
    pub train_val: (u32, u32),
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            dev_test: (8, 2),
            train_val: (9, 1),
            seed: 0,
        }
    }
}

pub const MIN_SPLIT_SIZE: usize = 10;

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (a, b) in [self.dev_test, self.train_val] {
            if a == 0 || b == 0 {
                return Err(Error::InvalidRatio(a, b));
            }
        }
        Ok(())
    }

    /// `(train, val, test)` sizes for `n` items. The smaller side of each
    /// ratio is floored; the remainder lands in train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor_share = |n: usize, (big, small): (u32, u32)| -> usize {
            ((n as u128 * small as u128) / (big as u128 + small as u128)) as usize
        };
        let test = floor_share(n, self.dev_test);
        let dev = n - test;
        let val = floor_share(dev, self.train_val);
        (dev - val, val, test)
    }
}

/// Shuffled index partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded Fisher-Yates shuffle of `0..n`, cut into train, val and test.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    if n < MIN_SPLIT_SIZE {
        return Err(Error::CorpusTooSmall {
            size: n,
            min: MIN_SPLIT_SIZE,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);
    let (train, val, _) = spec.sizes(n);
    let test = order.split_off(train + val);
    let val = order.split_off(train);
    Ok(SplitIndices {
        train: order,
        val,
        test,
    })
}

/// Splits any slice of items by [`split_indices`].
pub fn split_items<T: Clone>(items: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let idx = split_indices(items.len(), spec)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok((pick(&idx.train), pick(&idx.val), pick(&idx.test)))
}

pub fn split_holdout(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus, Corpus)> {
    let (train, val, test) = split_items(&corpus.posts, spec)?;
    let wrap = |posts| Corpus {
        posts,
        provenance: corpus.provenance.clone(),
    };
    Ok((wrap(train), wrap(val), wrap(test)))
}

/// Record of a split: the seed, the ratios, and which posts went where.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub dev_test_ratio: (u32, u32),
    pub train_val_ratio: (u32, u32),
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn new(spec: &SplitSpec, train: Vec<String>, val: Vec<String>, test: Vec<String>) -> Self {
        SplitManifest {
            seed: spec.seed,
            dev_test_ratio: spec.dev_test,
            train_val_ratio: spec.train_val,
            train,
            val,
            test,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "post_id,page_id,created_time,message,like,love,wow,haha,sad,angry,thankful\n";

    fn load(text: &str) -> Result<Loaded> {
        read_corpus(text.as_bytes(), "test.csv", LoadOptions::default())
    }

    fn post(id: &str, love: u64, wow: u64, sad: u64, angry: u64) -> RawPost {
        RawPost {
            post_id: id.into(),
            page_id: "p".into(),
            created_time: "2019-01-01T00:00:00".into(),
            message: "අබ".into(),
            reactions: ReactionCounts::considered(love, wow, sad, angry),
        }
    }

    #[test]
    fn three_records() {
        let text = format!(
            "{HEADER}1,p,t,\"අබ, කහ\",1,2,3,4,5,6,0\n2,p,t,x,0,0,0,0,0,0,0\n3,p,t,y,1,1,1,1,1,1,1\n"
        );
        let loaded = load(&text).unwrap();
        assert_eq!(loaded.corpus.len(), 3);
        assert!(loaded.warnings.is_empty());
        let first = &loaded.corpus.posts[0];
        assert_eq!(first.message, "අබ, කහ");
        assert_eq!(first.reactions.angry, 6);
        assert_eq!(loaded.corpus.posts[2].post_id, "3");
    }

    #[test]
    fn write_then_read() {
        let mut a = post("a", 1, 2, 3, 4);
        a.message = "අබ, \"කහ\"\nදැන්".into();
        a.reactions.like = 9;
        let corpus = Corpus::new(vec![a, post("b", 0, 0, 0, 0)], "mem").unwrap();
        for delimiter in *b",\t" {
            let mut buf = Vec::new();
            write_corpus(&mut buf, &corpus, delimiter).unwrap();
            let opts = LoadOptions {
                delimiter,
                ..LoadOptions::default()
            };
            let back = read_corpus(buf.as_slice(), "mem", opts).unwrap();
            assert_eq!(back.corpus.posts, corpus.posts);
        }
    }

    #[test]
    fn json_lines_skip_leading_meta() {
        let corpus = Corpus::new(vec![post("a", 1, 0, 0, 2)], "mem").unwrap();
        let meta = crate::records::ArtifactMeta {
            kind: "corpus".into(),
            seed: 1,
            config_digest: "d".into(),
        };
        let mut buf = Vec::new();
        crate::records::write_jsonl(&mut buf, Some(&meta), &corpus.posts).unwrap();
        let opts = LoadOptions {
            format: InputFormat::JsonLines,
            ..LoadOptions::default()
        };
        let back = read_corpus(buf.as_slice(), "mem", opts).unwrap();
        assert_eq!(back.corpus.posts, corpus.posts);
        assert!(back.warnings.is_empty());
    }

    #[test]
    fn negative_count_names_row() {
        let text = format!("{HEADER}1,p,t,x,0,0,0,0,0,0,0\n2,p,t,x,0,0,0,0,0,-1,0\n");
        let err = load(&text).unwrap_err().to_string();
        assert!(err.contains("negative reaction count at row 3"), "{err}");
    }

    #[test]
    fn missing_header_field() {
        let err = load("post_id,page_id\n1,2\n").unwrap_err().to_string();
        assert!(err.contains("created_time"), "{err}");
    }

    #[test]
    fn empty_file_warns() {
        let loaded = load("").unwrap();
        assert!(loaded.corpus.is_empty());
        assert_eq!(loaded.warnings.len(), 1);
        let loaded = load(HEADER).unwrap();
        assert!(loaded.corpus.is_empty());
        assert!(!loaded.warnings.is_empty());
    }

    #[test]
    fn extra_columns_warn() {
        let text = "post_id,page_id,created_time,message,like,love,wow,haha,sad,angry,thankful,shares\n1,p,t,x,0,1,0,0,0,0,0,9\n";
        let loaded = load(text).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        assert!(loaded.warnings[0].contains("shares"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{HEADER}1,p,t,x,0,0,0,0,0,0,0\n1,p,t,y,0,0,0,0,0,0,0\n");
        assert!(matches!(load(&text), Err(Error::DuplicatePostId(_))));
    }

    #[test]
    fn tab_delimited() {
        let text = HEADER.replace(',', "\t") + "1\tp\tt\tx, y\t0\t1\t0\t0\t0\t0\t0\n";
        let opts = LoadOptions {
            delimiter: b'\t',
            ..Default::default()
        };
        let loaded = read_corpus(text.as_bytes(), "t.tsv", opts).unwrap();
        assert_eq!(loaded.corpus.posts[0].message, "x, y");
    }

    #[test]
    fn json_lines() {
        let text = r#"{"post_id":"a","page_id":7,"created_time":"t","message":"අබ","like":1,"love":2,"wow":0,"haha":0,"sad":0,"angry":0,"thankful":0,"extra":true}

{"post_id":"b","page_id":"7","created_time":"t","message":"x","like":0,"love":0,"wow":0,"haha":0,"sad":1,"angry":0,"thankful":0}
"#;
        let opts = LoadOptions {
            format: InputFormat::JsonLines,
            ..Default::default()
        };
        let loaded = read_corpus(text.as_bytes(), "x.jsonl", opts).unwrap();
        assert_eq!(loaded.corpus.len(), 2);
        assert_eq!(loaded.corpus.posts[0].page_id, "7");
        assert!(loaded.warnings[0].contains("extra"));

        let bad = r#"{"post_id":"a","page_id":"p","created_time":"t","message":"m","like":0,"love":0,"wow":0,"haha":0,"sad":0,"angry":-3,"thankful":0}"#;
        let err = read_corpus(bad.as_bytes(), "x.jsonl", opts)
            .unwrap_err()
            .to_string();
        assert!(err.contains("negative reaction count at row 1"), "{err}");
        let missing = r#"{"post_id":"a"}"#;
        let err = read_corpus(missing.as_bytes(), "x.jsonl", opts)
            .unwrap_err()
            .to_string();
        assert!(err.contains("missing field"), "{err}");
    }

    #[test]
    fn stats_single_love() {
        let corpus = Corpus::new(vec![post("a", 1, 0, 0, 0)], "").unwrap();
        let stats = compute_reaction_stats(&corpus).unwrap();
        assert_eq!(stats.filtered_percentage(Reaction::Love), Some(100.0));
        assert_eq!(stats.filtered_percentage(Reaction::Like), None);
        assert!(matches!(
            compute_reaction_stats(&Corpus::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn filter() {
        let mut likes_only = post("a", 0, 0, 0, 0);
        likes_only.reactions.like = 12;
        let mut empty = post("e", 1, 0, 0, 0);
        empty.message = "  ".into();
        let corpus = Corpus::new(
            vec![
                likes_only,
                post("b", 0, 0, 1, 0),
                empty,
                post("c", 1, 0, 0, 0),
                post("d", 0, 2, 0, 0),
            ],
            "",
        )
        .unwrap();
        let (kept, report) = filter_annotatable(&corpus);
        assert_eq!(kept.len(), 3);
        assert_eq!(report.no_considered_reactions, 1);
        assert_eq!(report.empty_message, 1);
        assert_eq!(kept.posts[0].post_id, "b");
    }

    #[test]
    fn split_sizes() {
        let spec = SplitSpec::default();
        assert_eq!(spec.sizes(150_000), (108_000, 12_000, 30_000));
        assert_eq!(spec.sizes(100), (72, 8, 20));
        assert_eq!(spec.sizes(10), (8, 0, 2));
        assert_eq!(spec.sizes(13), (10, 1, 2));
    }

    #[test]
    fn split_rejects_small_and_bad_ratio() {
        assert!(matches!(
            split_indices(9, &SplitSpec::default()),
            Err(Error::CorpusTooSmall { size: 9, .. })
        ));
        let bad = SplitSpec {
            dev_test: (8, 0),
            ..Default::default()
        };
        assert!(matches!(
            split_indices(100, &bad),
            Err(Error::InvalidRatio(8, 0))
        ));
    }

    #[test]
    fn split_is_seeded() {
        let a = split_indices(100, &SplitSpec::with_seed(7)).unwrap();
        let b = split_indices(100, &SplitSpec::with_seed(7)).unwrap();
        let c = split_indices(100, &SplitSpec::with_seed(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!((a.train.len(), a.val.len(), a.test.len()), (72, 8, 20));
    }
}
