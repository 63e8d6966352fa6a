//! Reaction-based distant supervision.
//!
//! Only the four considered reactions (love, wow, sad, angry) enter the
//! score. Like, haha and thankful are carried on [`ReactionCounts`] for
//! corpus statistics but never influence a label.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{CleanedPost, LabeledPost};

/// The seven reactions present in the source data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reaction {
    Like,
    Love,
    Wow,
    Haha,
    Sad,
    Angry,
    Thankful,
}

impl Reaction {
    pub const ALL: [Reaction; 7] = [
        Reaction::Like,
        Reaction::Love,
        Reaction::Wow,
        Reaction::Haha,
        Reaction::Sad,
        Reaction::Angry,
        Reaction::Thankful,
    ];

    /// Reactions that take part in scoring, in distribution order.
    pub const CONSIDERED: [Reaction; 4] = [
        Reaction::Love,
        Reaction::Wow,
        Reaction::Sad,
        Reaction::Angry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reaction::Like => "like",
            Reaction::Love => "love",
            Reaction::Wow => "wow",
            Reaction::Haha => "haha",
            Reaction::Sad => "sad",
            Reaction::Angry => "angry",
            Reaction::Thankful => "thankful",
        }
    }

    pub fn is_considered(self) -> bool {
        matches!(
            self,
            Reaction::Love | Reaction::Wow | Reaction::Sad | Reaction::Angry
        )
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw reaction counts of one post.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReactionCounts {
    pub like: u64,
    pub love: u64,
    pub wow: u64,
    pub haha: u64,
    pub sad: u64,
    pub angry: u64,
    pub thankful: u64,
}

impl ReactionCounts {
    /// Counts with only the considered reactions set.
    pub fn considered(love: u64, wow: u64, sad: u64, angry: u64) -> Self {
        ReactionCounts {
            love,
            wow,
            sad,
            angry,
            ..Default::default()
        }
    }

    pub fn get(&self, reaction: Reaction) -> u64 {
        match reaction {
            Reaction::Like => self.like,
            Reaction::Love => self.love,
            Reaction::Wow => self.wow,
            Reaction::Haha => self.haha,
            Reaction::Sad => self.sad,
            Reaction::Angry => self.angry,
            Reaction::Thankful => self.thankful,
        }
    }

    pub fn set(&mut self, reaction: Reaction, value: u64) {
        let slot = match reaction {
            Reaction::Like => &mut self.like,
            Reaction::Love => &mut self.love,
            Reaction::Wow => &mut self.wow,
            Reaction::Haha => &mut self.haha,
            Reaction::Sad => &mut self.sad,
            Reaction::Angry => &mut self.angry,
            Reaction::Thankful => &mut self.thankful,
        };
        *slot = value;
    }

    /// `love + wow + sad + angry`.
    pub fn considered_total(&self) -> Result<u64> {
        self.love
            .checked_add(self.wow)
            .and_then(|s| s.checked_add(self.sad))
            .and_then(|s| s.checked_add(self.angry))
            .ok_or(Error::CountOverflow)
    }

    /// Multiplies every count by `k`.
    pub fn scaled(&self, k: u64) -> Option<Self> {
        Some(ReactionCounts {
            like: self.like.checked_mul(k)?,
            love: self.love.checked_mul(k)?,
            wow: self.wow.checked_mul(k)?,
            haha: self.haha.checked_mul(k)?,
            sad: self.sad.checked_mul(k)?,
            angry: self.angry.checked_mul(k)?,
            thankful: self.thankful.checked_mul(k)?,
        })
    }
}

/// Normalized reaction scores of a post.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    /// Total of the considered reactions.
    pub t: u64,
    pub n_love: f64,
    pub n_wow: f64,
    pub n_sad: f64,
    pub n_angry: f64,
    pub pos: f64,
    pub neg: f64,
    /// Net sentiment, `pos - neg`, in `[-1, 1]`.
    pub sen: f64,
}

impl SentimentScore {
    /// `(n_love, n_wow, n_sad, n_angry)`.
    pub fn distribution(&self) -> [f64; 4] {
        [self.n_love, self.n_wow, self.n_sad, self.n_angry]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SentimentLabel {
    Positive,
    Negative,
}

impl SentimentLabel {
    /// Positive at and above zero.
    pub fn from_sen(sen: f64) -> Self {
        if sen >= 0.0 {
            SentimentLabel::Positive
        } else {
            SentimentLabel::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == SentimentLabel::Positive
    }

    /// 1.0 for Positive, 0.0 for Negative.
    pub fn as_target(self) -> f64 {
        match self {
            SentimentLabel::Positive => 1.0,
            SentimentLabel::Negative => 0.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SentimentLabel::Positive => SentimentLabel::Negative,
            SentimentLabel::Negative => SentimentLabel::Positive,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentimentLabel::Positive => "Positive",
            SentimentLabel::Negative => "Negative",
        })
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(SentimentLabel::Positive),
            "negative" | "neg" => Ok(SentimentLabel::Negative),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Scores a post from its considered reactions.
///
/// `pos`, `neg` and `sen` are each derived from exact integer sums and
/// rounded once, so `sen` is exactly zero iff the positive and negative
/// counts are equal and its sign is always exact. In real arithmetic these
/// coincide with `n_love + n_wow`, `n_sad + n_angry` and `pos - neg`.
pub fn score(counts: &ReactionCounts) -> Result<SentimentScore> {
    let t = counts.considered_total()?;
    if t == 0 {
        return Err(Error::NoConsideredReactions);
    }
    let total = t as f64;
    let positive = counts.love as u128 + counts.wow as u128;
    let negative = counts.sad as u128 + counts.angry as u128;
    let net = positive as i128 - negative as i128;
    Ok(SentimentScore {
        t,
        n_love: counts.love as f64 / total,
        n_wow: counts.wow as f64 / total,
        n_sad: counts.sad as f64 / total,
        n_angry: counts.angry as f64 / total,
        pos: positive as f64 / total,
        neg: negative as f64 / total,
        sen: net as f64 / total,
    })
}

pub fn classify(score: &SentimentScore) -> SentimentLabel {
    SentimentLabel::from_sen(score.sen)
}

/// What to do with posts that have no considered reactions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroPolicy {
    #[default]
    Drop,
    /// Keep the post with `sen = 0`, which labels it Positive.
    Positive,
}

impl FromStr for ZeroPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "drop" => Ok(ZeroPolicy::Drop),
            "positive" => Ok(ZeroPolicy::Positive),
            other => Err(format!(
                "unknown zero policy {other:?} (expected drop or positive)"
            )),
        }
    }
}

/// Label assigned to one post, with the score it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub sen: f64,
    pub label: SentimentLabel,
    /// `None` for posts kept under [`ZeroPolicy::Positive`] without reactions.
    pub distribution: Option<[f64; 4]>,
}

/// Applies score and classify to a single post under `policy`. Returns
/// `None` if the post is dropped.
pub fn annotate(counts: &ReactionCounts, policy: ZeroPolicy) -> Result<Option<Annotation>> {
    match score(counts) {
        Ok(s) => Ok(Some(Annotation {
            sen: s.sen,
            label: classify(&s),
            distribution: Some(s.distribution()),
        })),
        Err(Error::NoConsideredReactions) => Ok(match policy {
            ZeroPolicy::Drop => None,
            ZeroPolicy::Positive => Some(Annotation {
                sen: 0.0,
                label: SentimentLabel::Positive,
                distribution: None,
            }),
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHistogram {
    pub positive: usize,
    pub negative: usize,
    /// Posts removed by [`ZeroPolicy::Drop`].
    pub dropped: usize,
}

impl LabelHistogram {
    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Positive => self.positive += 1,
            SentimentLabel::Negative => self.negative += 1,
        }
    }

    pub fn labeled(&self) -> usize {
        self.positive + self.negative
    }
}

/// Labels every cleaned post. Returns the labeled posts in input order and
/// the label histogram.
pub fn annotate_corpus(
    posts: &[CleanedPost],
    policy: ZeroPolicy,
) -> Result<(Vec<LabeledPost>, LabelHistogram)> {
    let mut histogram = LabelHistogram::default();
    let mut labeled = Vec::with_capacity(posts.len());
    for post in posts {
        match annotate(&post.reactions, policy)? {
            Some(a) => {
                histogram.add(a.label);
                labeled.push(LabeledPost {
                    post_id: post.post_id.clone(),
                    tokens: post.tokens.clone(),
                    sen: a.sen,
                    label: a.label,
                    distribution: a.distribution,
                });
            }
            None => histogram.dropped += 1,
        }
    }
    Ok((labeled, histogram))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_love() {
        let s = score(&ReactionCounts::considered(10, 0, 0, 0)).unwrap();
        assert_eq!((s.pos, s.neg, s.sen), (1.0, 0.0, 1.0));
        assert_eq!(classify(&s), SentimentLabel::Positive);
    }

    #[test]
    fn balanced_reactions() {
        let s = score(&ReactionCounts::considered(1, 1, 1, 1)).unwrap();
        assert_eq!((s.pos, s.neg, s.sen), (0.5, 0.5, 0.0));
        assert_eq!(classify(&s), SentimentLabel::Positive);
    }

    #[test]
    fn mixed_counts() {
        let s = score(&ReactionCounts::considered(2, 1, 4, 3)).unwrap();
        assert_eq!(s.t, 10);
        assert!((s.pos - 0.3).abs() < 1e-15);
        assert!((s.neg - 0.7).abs() < 1e-15);
        assert!((s.sen + 0.4).abs() < 1e-15);
        assert_eq!(classify(&s), SentimentLabel::Negative);
    }

    #[test]
    fn zero_total_is_an_error() {
        let counts = ReactionCounts {
            like: 12,
            haha: 3,
            ..Default::default()
        };
        assert!(matches!(score(&counts), Err(Error::NoConsideredReactions)));
    }

    #[test]
    fn label_boundaries() {
        assert_eq!(SentimentLabel::from_sen(0.0), SentimentLabel::Positive);
        assert_eq!(SentimentLabel::from_sen(-0.0), SentimentLabel::Positive);
        assert_eq!(SentimentLabel::from_sen(-0.4), SentimentLabel::Negative);
        assert_eq!(SentimentLabel::from_sen(1.0), SentimentLabel::Positive);
    }

    #[test]
    fn balanced_counts_give_exact_zero() {
        let s = score(&ReactionCounts::considered(1, 2, 0, 3)).unwrap();
        assert_eq!(s.sen, 0.0);
        assert_eq!(s.pos, s.neg);
    }

    #[test]
    fn zero_policy() {
        let empty = ReactionCounts::default();
        assert_eq!(annotate(&empty, ZeroPolicy::Drop).unwrap(), None);
        let kept = annotate(&empty, ZeroPolicy::Positive).unwrap().unwrap();
        assert_eq!(kept.label, SentimentLabel::Positive);
        assert_eq!(kept.sen, 0.0);
        assert_eq!(kept.distribution, None);
    }

    fn cleaned(id: &str, love: u64, wow: u64, sad: u64, angry: u64) -> CleanedPost {
        CleanedPost {
            post_id: id.into(),
            tokens: vec!["අ".into()],
            reactions: ReactionCounts::considered(love, wow, sad, angry),
        }
    }

    #[test]
    fn corpus_histogram() {
        let posts = [
            cleaned("a", 3, 0, 0, 0),
            cleaned("b", 0, 0, 2, 0),
            cleaned("c", 1, 0, 1, 0),
        ];
        let (labeled, hist) = annotate_corpus(&posts, ZeroPolicy::Drop).unwrap();
        assert_eq!(labeled.len(), 3);
        assert_eq!((hist.positive, hist.negative), (2, 1));
    }

    #[test]
    fn corpus_zero_policies() {
        let posts = [cleaned("a", 3, 0, 0, 0), cleaned("z", 0, 0, 0, 0)];
        let (labeled, hist) = annotate_corpus(&posts, ZeroPolicy::Drop).unwrap();
        assert_eq!(labeled.len(), 1);
        assert_eq!(hist.dropped, 1);
        let (labeled, hist) = annotate_corpus(&posts, ZeroPolicy::Positive).unwrap();
        assert_eq!(labeled.len(), 2);
        assert_eq!(labeled[1].label, SentimentLabel::Positive);
        assert_eq!(hist.positive, 2);
    }

    #[test]
    fn parse_policy_and_label() {
        assert_eq!("drop".parse::<ZeroPolicy>().unwrap(), ZeroPolicy::Drop);
        assert!("keep".parse::<ZeroPolicy>().is_err());
        assert_eq!(
            "Negative".parse::<SentimentLabel>().unwrap(),
            SentimentLabel::Negative
        );
    }
}
