//! Generated reaction-annotated corpora with a planted sentiment lexicon.
//!
//! Every post has a hidden clean label. Its text mixes tokens from that
//! label's lexicon with neutral filler, a few tokens from the opposite
//! lexicon, and optional noise (links, numbers, tags, English words) that
//! the normalizer should strip. Reactions agree with the clean label except
//! for a configurable fraction of posts whose reactions are flipped.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::{ReactionCounts, SentimentLabel};
use crate::corpus::{Corpus, RawPost};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub posts: usize,
    pub positive_tokens: usize,
    pub negative_tokens: usize,
    pub neutral_tokens: usize,
    /// Probability that a post's clean label is Positive.
    pub positive_prior: f64,
    /// Fraction of posts whose reactions contradict the clean label.
    pub label_noise: f64,
    /// Inclusive range of lexicon tokens carrying the post's own polarity.
    pub signal_tokens: (usize, usize),
    /// Probability of one token from the opposite lexicon.
    pub distractor_rate: f64,
    /// Inclusive range of Sinhala tokens per post.
    pub length: (usize, usize),
    /// Probability of each kind of non-Sinhala noise in a message.
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            posts: 2000,
            positive_tokens: 200,
            negative_tokens: 200,
            neutral_tokens: 400,
            positive_prior: 0.6,
            label_noise: 0.1,
            signal_tokens: (3, 5),
            distractor_rate: 0.2,
            length: (6, 16),
            noise_rate: 0.25,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.posts == 0 {
            return bad("synthetic corpus needs at least one post".into());
        }
        if self.positive_tokens == 0 || self.negative_tokens == 0 || self.neutral_tokens == 0 {
            return bad("every lexicon needs at least one token".into());
        }
        for (name, p) in [
            ("positive prior", self.positive_prior),
            ("label noise", self.label_noise),
            ("distractor rate", self.distractor_rate),
            ("noise rate", self.noise_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        let (lo, hi) = self.signal_tokens;
        if lo == 0 || lo > hi {
            return bad(format!("bad signal token range {lo}..={hi}"));
        }
        let (lo_len, hi_len) = self.length;
        if lo_len > hi_len || hi_len < hi + 1 {
            return bad(format!(
                "post length range {lo_len}..={hi_len} cannot hold {hi} signal tokens and a distractor"
            ));
        }
        Ok(())
    }
}

/// The planted lexicons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedLabel {
    pub post_id: String,
    pub label: SentimentLabel,
    /// Whether the reactions were flipped against the label.
    pub noisy: bool,
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub planted: Vec<PlantedLabel>,
    pub lexicon: Lexicon,
}

impl SyntheticCorpus {
    pub fn planted_map(&self) -> BTreeMap<&str, SentimentLabel> {
        self.planted
            .iter()
            .map(|p| (p.post_id.as_str(), p.label))
            .collect()
    }
}

const CONSONANTS: [char; 20] = [
    'ක', 'ග', 'ච', 'ජ', 'ට', 'ඩ', 'ත', 'ද', 'න', 'ප', 'බ', 'ම', 'ය', 'ර', 'ල', 'ව', 'ස', 'හ', 'ළ',
    'ණ',
];
const VOWEL_SIGNS: [&str; 8] = ["", "ා", "ි", "ී", "ු", "ෙ", "ො", "ැ"];
const ENGLISH: [&str; 6] = ["video", "news", "today", "share", "live", "page"];

/// Distinct pseudo-words of three or four syllables.
fn pseudo_words(rng: &mut ChaCha8Rng, n: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(3..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONSONANTS.choose(rng).expect("non-empty"));
            w.push_str(VOWEL_SIGNS.choose(rng).expect("non-empty"));
        }
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Reactions whose net sentiment has the sign of `label`.
fn reactions(rng: &mut ChaCha8Rng, label: SentimentLabel) -> ReactionCounts {
    let t: u64 = rng.gen_range(10..=400);
    let share: f64 = rng.gen_range(0.65..=0.97);
    let own = ((share * t as f64).round() as u64).min(t);
    let other = t - own;
    let split = |rng: &mut ChaCha8Rng, n: u64| {
        let a = (n as f64 * rng.gen_range(0.55..=0.95)).round() as u64;
        (a.min(n), n - a.min(n))
    };
    let (p, n) = if label.is_positive() {
        (own, other)
    } else {
        (other, own)
    };
    let (love, wow) = split(rng, p);
    let (sad, angry) = split(rng, n);
    ReactionCounts {
        like: rng.gen_range(t..=20 * t),
        love,
        wow,
        haha: rng.gen_range(0..=t / 2),
        sad,
        angry,
        thankful: 0,
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut taken = BTreeSet::new();
    let lexicon = Lexicon {
        positive: pseudo_words(&mut rng, config.positive_tokens, &mut taken),
        negative: pseudo_words(&mut rng, config.negative_tokens, &mut taken),
        neutral: pseudo_words(&mut rng, config.neutral_tokens, &mut taken),
    };
    let mut posts = Vec::with_capacity(config.posts);
    let mut planted = Vec::with_capacity(config.posts);
    let width = config.posts.to_string().len();
    for i in 0..config.posts {
        let label = if rng.gen_bool(config.positive_prior) {
            SentimentLabel::Positive
        } else {
            SentimentLabel::Negative
        };
        let (own, opposite) = if label.is_positive() {
            (&lexicon.positive, &lexicon.negative)
        } else {
            (&lexicon.negative, &lexicon.positive)
        };
        let len = rng.gen_range(config.length.0..=config.length.1);
        let signal = rng.gen_range(config.signal_tokens.0..=config.signal_tokens.1);
        let mut words: Vec<String> = (0..signal)
            .map(|_| own.choose(&mut rng).expect("non-empty").clone())
            .collect();
        if rng.gen_bool(config.distractor_rate) {
            words.push(opposite.choose(&mut rng).expect("non-empty").clone());
        }
        while words.len() < len {
            words.push(lexicon.neutral.choose(&mut rng).expect("non-empty").clone());
        }
        words.shuffle(&mut rng);
        let mut noise = Vec::new();
        if rng.gen_bool(config.noise_rate) {
            noise.push(format!(
                "https://news.example.lk/{}",
                rng.gen_range(1000..99999)
            ));
        }
        if rng.gen_bool(config.noise_rate) {
            noise.push(rng.gen_range(1..2030).to_string());
        }
        if rng.gen_bool(config.noise_rate) {
            noise.push(ENGLISH.choose(&mut rng).expect("non-empty").to_string());
        }
        if rng.gen_bool(config.noise_rate) {
            noise.push(format!("#{}", ENGLISH.choose(&mut rng).expect("non-empty")));
        }
        for n in noise {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, n);
        }
        let noisy = rng.gen_bool(config.label_noise);
        let shown = if noisy { label.flipped() } else { label };
        let post_id = format!("syn-{i:0width$}");
        posts.push(RawPost {
            post_id: post_id.clone(),
            page_id: format!("page-{}", rng.gen_range(1..=12)),
            created_time: format!(
                "2019-{:02}-{:02}T{:02}:00:00",
                rng.gen_range(1..=12),
                rng.gen_range(1..=28),
                rng.gen_range(0..24)
            ),
            message: words.join(" "),
            reactions: reactions(&mut rng, shown),
        });
        planted.push(PlantedLabel {
            post_id,
            label,
            noisy,
        });
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::new(posts, format!("synthetic(seed={})", config.seed))?,
        planted,
        lexicon,
    })
}
