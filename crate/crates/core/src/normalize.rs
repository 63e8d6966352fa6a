//! Sinhala message cleaning.
//!
//! Stages run in this order:
//!
//! 1. [`strip_nonprintable`]: characters of general category Cc, Cn, Co, Cs
//!    or Cf become a space, except ZERO WIDTH JOINER which is deleted.
//! 2. [`remove_patterns`]: emails, URLs, `@user` tags and `#hashtags`.
//! 3. [`remove_numeric_tokens`]: any token containing a decimal digit (Nd).
//! 4. [`remove_non_sinhala_tokens`]: any token with a character outside
//!    U+0D80..=U+0DFF and ZWJ.
//! 5. Whitespace collapse and split on single spaces.
//! 6. [`remove_stopwords`].
//!
//! Category lookups use Unicode 16.0 tables. Rust strings cannot hold
//! surrogates, so Cs never occurs in practice.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

pub const ZERO_WIDTH_JOINER: char = '\u{200D}';
pub const SINHALA_BLOCK: std::ops::RangeInclusive<char> = '\u{0D80}'..='\u{0DFF}';
pub const UNICODE_VERSION: (u64, u64, u64) = unicode_general_category::UNICODE_VERSION;

pub fn is_sinhala_char(c: char) -> bool {
    SINHALA_BLOCK.contains(&c) || c == ZERO_WIDTH_JOINER
}

fn is_nonprintable(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::Control
            | GeneralCategory::Unassigned
            | GeneralCategory::PrivateUse
            | GeneralCategory::Surrogate
            | GeneralCategory::Format
    )
}

fn is_decimal_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

/// Replaces non-printable characters with a space and deletes ZWJ.
pub fn strip_nonprintable(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c == ZERO_WIDTH_JOINER {
            continue;
        }
        if is_nonprintable(c) {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

static EMAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}").unwrap()
});
static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:[A-Za-z][A-Za-z0-9+.\-]*://|\bwww\.)\S*").unwrap());
static USER_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\S*").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\S*").unwrap());

/// Deletes every match. A single space is left in its place only when the
/// match sat between two non-whitespace characters, so removal never glues
/// neighbouring words. With `token_start`, only matches at the start of the
/// text or right after whitespace count.
fn remove_spans(text: &str, re: &Regex, token_start: bool) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for m in re.find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        if token_start && before.is_some_and(|c| !c.is_whitespace()) {
            continue;
        }
        out.push_str(&text[last..m.start()]);
        let after = text[m.end()..].chars().next();
        let glued = |c: Option<char>| c.is_some_and(|c| !c.is_whitespace());
        if glued(before) && glued(after) {
            out.push(' ');
        }
        last = m.end();
    }
    out.push_str(&text[last..]);
    out
}

/// Removes emails, URLs, user tags and hashtags, in that order.
pub fn remove_patterns(text: &str) -> String {
    let text = remove_spans(text, &EMAIL, false);
    let text = remove_spans(&text, &URL, false);
    let text = remove_spans(&text, &USER_TAG, true);
    remove_spans(&text, &HASHTAG, true)
}

fn retain_tokens(text: &str, keep: impl Fn(&str) -> bool) -> String {
    text.split_whitespace()
        .filter(|t| keep(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Drops whitespace-delimited tokens that contain a decimal digit.
pub fn remove_numeric_tokens(text: &str) -> String {
    retain_tokens(text, |t| !t.chars().any(is_decimal_digit))
}

/// Drops tokens that contain anything besides Sinhala letters and ZWJ.
pub fn remove_non_sinhala_tokens(text: &str) -> String {
    retain_tokens(text, |t| t.chars().all(is_sinhala_char))
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &Stopwords) -> Vec<String> {
    if stopwords.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// A set of stopword tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for (i, w) in words.into_iter().enumerate() {
            let w = w.into();
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::InvalidStopword {
                    line: i + 1,
                    entry: w,
                });
            }
            set.insert(w);
        }
        Ok(Stopwords(set))
    }

    /// One token per line; blank lines and lines starting with `#` are skipped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<stopwords>", e))?;
            let entry = line.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            if entry.chars().any(char::is_whitespace) {
                return Err(Error::InvalidStopword {
                    line: i + 1,
                    entry: entry.to_string(),
                });
            }
            set.insert(entry.to_string());
        }
        Ok(Stopwords(set))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Per-stage switches. All stages are on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stages {
    pub nonprintable: bool,
    pub patterns: bool,
    pub numerics: bool,
    pub non_sinhala: bool,
    pub stopwords: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            nonprintable: true,
            patterns: true,
            numerics: true,
            non_sinhala: true,
            stopwords: true,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NormalizerConfig {
    pub stopwords: Stopwords,
    pub stages: Stages,
}

impl NormalizerConfig {
    pub fn with_stopwords(stopwords: Stopwords) -> Self {
        NormalizerConfig {
            stopwords,
            stages: Stages::default(),
        }
    }
}

/// Tokens of a cleaned message. With the non-Sinhala stage enabled every
/// character is in the Sinhala block or is ZWJ.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CleanedText {
    pub tokens: Vec<String>,
}

impl CleanedText {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

pub fn normalize(message: &str, config: &NormalizerConfig) -> CleanedText {
    let stages = &config.stages;
    let mut text = if stages.nonprintable {
        strip_nonprintable(message)
    } else {
        message.to_string()
    };
    if stages.patterns {
        text = remove_patterns(&text);
    }
    if stages.numerics {
        text = remove_numeric_tokens(&text);
    }
    if stages.non_sinhala {
        text = remove_non_sinhala_tokens(&text);
    }
    let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let tokens = if stages.stopwords {
        remove_stopwords(tokens, &config.stopwords)
    } else {
        tokens
    };
    CleanedText { tokens }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain() -> NormalizerConfig {
        NormalizerConfig::default()
    }

    #[test]
    fn control_becomes_space() {
        assert_eq!(strip_nonprintable("අ\u{0007}බ"), "අ බ");
    }

    #[test]
    fn zwj_is_deleted() {
        assert_eq!(strip_nonprintable("ක\u{200D}ය"), "කය");
    }

    #[test]
    fn other_format_chars_become_space() {
        // ZERO WIDTH NON-JOINER and SOFT HYPHEN are Cf
        assert_eq!(strip_nonprintable("අ\u{200C}බ"), "අ බ");
        assert_eq!(strip_nonprintable("අ\u{00AD}බ"), "අ බ");
    }

    #[test]
    fn private_use_and_unassigned_become_space() {
        assert_eq!(strip_nonprintable("අ\u{E000}බ"), "අ බ");
        assert_eq!(strip_nonprintable("අ\u{0378}බ"), "අ බ");
    }

    #[test]
    fn printable_text_is_untouched() {
        let s = "ශ්‍රී ලංකාව hello, world! 123";
        let without_zwj: String = s.chars().filter(|&c| c != ZERO_WIDTH_JOINER).collect();
        assert_eq!(strip_nonprintable(s), without_zwj);
        assert_eq!(strip_nonprintable("අබ කහ"), "අබ කහ");
    }

    #[test]
    fn patterns() {
        assert_eq!(
            remove_patterns("බලන්න https://ex.com/a?b=1 දැන්"),
            "බලන්න  දැන්"
        );
        assert_eq!(remove_patterns("@user සුභ #tag"), " සුභ ");
        assert_eq!(remove_patterns("a.b@c.lk ok"), " ok");
        assert_eq!(remove_patterns("www.x.lk අබ"), " අබ");
        assert_eq!(remove_patterns("අබa@b.lkකහ"), "අබ කහ");
    }

    #[test]
    fn tags_must_start_a_token() {
        assert_eq!(remove_patterns("අ@බ"), "අ@බ");
        assert_eq!(remove_patterns("අ#බ"), "අ#බ");
        assert_eq!(remove_patterns("@a @b අ"), "  අ");
    }

    #[test]
    fn numeric_tokens() {
        assert_eq!(remove_numeric_tokens("රු 500 යි"), "රු යි");
        assert_eq!(remove_numeric_tokens("2020දී"), "");
        assert_eq!(remove_numeric_tokens("අබ"), "අබ");
        // Sinhala Lith digits are Nd too
        assert_eq!(remove_numeric_tokens("අ \u{0DE7}"), "අ");
    }

    #[test]
    fn non_sinhala_tokens() {
        assert_eq!(remove_non_sinhala_tokens("good අබ"), "අබ");
        assert_eq!(remove_non_sinhala_tokens("අබX"), "");
        assert_eq!(remove_non_sinhala_tokens("අබ කහ"), "අබ කහ");
    }

    #[test]
    fn stopwords() {
        let sw = Stopwords::new(["s1", "s2"]).unwrap();
        let toks = vec!["s1".to_string(), "w".into(), "s2".into()];
        assert_eq!(remove_stopwords(toks.clone(), &sw), vec!["w".to_string()]);
        assert_eq!(remove_stopwords(toks.clone(), &Stopwords::default()), toks);
        let all = Stopwords::new(["s1", "w", "s2"]).unwrap();
        assert!(remove_stopwords(toks, &all).is_empty());
    }

    #[test]
    fn stopword_file() {
        let text = "# comment\nඅබ\n\n  කහ  \n";
        let sw = Stopwords::from_reader(text.as_bytes()).unwrap();
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("අබ") && sw.contains("කහ"));
        let err = Stopwords::from_reader("අබ\nඅ බ\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidStopword { line: 2, .. }));
    }

    #[test]
    fn full_pipeline() {
        let out = normalize("අබ @u 99 www.x.lk කහ", &plain());
        assert_eq!(out.tokens, vec!["අබ", "කහ"]);
        assert!(normalize("", &plain()).is_empty());
        assert!(normalize("English only 123", &plain()).is_empty());
    }

    #[test]
    fn disabled_stages_pass_text_through() {
        let config = NormalizerConfig {
            stages: Stages {
                non_sinhala: false,
                ..Stages::default()
            },
            ..plain()
        };
        assert_eq!(normalize("good අබ", &config).tokens, vec!["good", "අබ"]);
    }
}
