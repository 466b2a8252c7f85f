//! Seeded synthetic corpora for benchmarks and end-to-end exercises: labeled
//! utterances whose class is carried by a single indicator token, and raw
//! tweet streams that exercise every filtering rule.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{RawUtterance, Source};
use crate::distant::RawTweet;
use crate::error::{Error, Result};
use crate::rng;

/// Recipe for an indicator-token corpus. Each utterance holds exactly one
/// class indicator ("tense<i>" for stressed, "calm<i>" for unstressed) among
/// neutral filler words ("w<i>").
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSpec {
    pub per_class: usize,
    pub indicators_per_class: usize,
    pub filler_vocab: usize,
    pub tokens_per_utterance: usize,
    /// Probability of flipping the label after the text is built.
    pub label_noise: f64,
    /// Some((m, p)): with probability p the indicator index is drawn from the
    /// first m instead of uniformly from all of them.
    pub skew: Option<(usize, f64)>,
    pub seed: u64,
}

impl Default for IndicatorSpec {
    fn default() -> Self {
        Self {
            per_class: 128,
            indicators_per_class: 4,
            filler_vocab: 50,
            tokens_per_utterance: 8,
            label_noise: 0.0,
            skew: None,
            seed: 0,
        }
    }
}

impl IndicatorSpec {
    fn validate(&self) -> Result<()> {
        if self.per_class == 0
            || self.indicators_per_class == 0
            || self.filler_vocab == 0
            || self.tokens_per_utterance == 0
        {
            return Err(Error::Config("indicator corpus sizes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::Config(format!(
                "label noise {} outside [0, 1]",
                self.label_noise
            )));
        }
        if let Some((m, p)) = self.skew {
            if m == 0 || m > self.indicators_per_class {
                return Err(Error::Config(format!(
                    "skew pool {m} outside 1..={}",
                    self.indicators_per_class
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("skew probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

pub fn indicator_token(class: u8, index: usize) -> String {
    if class == 1 {
        format!("tense{index}")
    } else {
        format!("calm{index}")
    }
}

/// Parses an indicator token back into (class, index).
pub fn parse_indicator(token: &str) -> Option<(u8, usize)> {
    for (class, prefix) in [(1u8, "tense"), (0u8, "calm")] {
        if let Some(rest) = token.strip_prefix(prefix) {
            if let Ok(index) = rest.parse::<usize>() {
                return Some((class, index));
            }
        }
    }
    None
}

fn pick_indicator(spec: &IndicatorSpec, r: &mut ChaCha8Rng) -> usize {
    if let Some((m, p)) = spec.skew {
        if r.random_range(0.0..1.0) < p {
            return r.random_range(0..m);
        }
    }
    r.random_range(0..spec.indicators_per_class)
}

/// Generates `2 * per_class` utterances, alternating classes, deterministic
/// in the seed.
pub fn indicator_corpus(spec: &IndicatorSpec, source: Source) -> Result<Vec<RawUtterance>> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, "indicator-corpus", 0);
    let mut out = Vec::with_capacity(2 * spec.per_class);
    for i in 0..2 * spec.per_class {
        let class = (i % 2) as u8;
        let indicator = indicator_token(class, pick_indicator(spec, &mut r));
        let position = r.random_range(0..spec.tokens_per_utterance);
        let mut tokens = Vec::with_capacity(spec.tokens_per_utterance);
        for t in 0..spec.tokens_per_utterance {
            if t == position {
                tokens.push(indicator.clone());
            } else {
                tokens.push(format!("w{}", r.random_range(0..spec.filler_vocab)));
            }
        }
        let mut label = class;
        if spec.label_noise > 0.0 && r.random_range(0.0..1.0) < spec.label_noise {
            label = 1 - label;
        }
        out.push(RawUtterance::new(tokens.join(" "), label, source));
    }
    Ok(out)
}

const TWEET_WORDS: [&str; 12] = [
    "deadline", "exam", "sunday", "coffee", "rain", "meeting", "beach", "nap", "emails",
    "traffic", "laundry", "brunch",
];

fn tweet_body(r: &mut ChaCha8Rng) -> String {
    let n = r.random_range(3..6);
    (0..n)
        .map(|_| TWEET_WORDS[r.random_range(0..TWEET_WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// A seeded raw tweet stream mixing keepable tweets of both classes with
/// every rejection case the filter distinguishes, plus occasional exact
/// duplicates.
pub fn synthetic_tweets(count: usize, seed: u64) -> Vec<RawTweet> {
    let lex = crate::distant::HashtagLexicon::default();
    let stressed: Vec<&String> = lex.stressed().iter().collect();
    let unstressed: Vec<&String> = lex.unstressed().iter().collect();
    let mut r = rng::stream(seed, "synthetic-tweets", 0);
    let mut out: Vec<RawTweet> = Vec::with_capacity(count);
    for _ in 0..count {
        let body = tweet_body(&mut r);
        let kind = r.random_range(0..20);
        let (text, has_media) = match kind {
            0..=5 => (
                format!("{body} #{}", stressed[r.random_range(0..stressed.len())]),
                false,
            ),
            6..=11 => (
                format!("{body} #{}", unstressed[r.random_range(0..unstressed.len())]),
                false,
            ),
            12 => (format!("{body} http://t.co/x1 #stressed"), false),
            13 => (format!("{body} #stressed"), true),
            14 => (format!("#stressed {body}"), false),
            15 => (format!("{body} #a #b #c #stressed"), false),
            16 => (format!("{body} #weekend"), false),
            17 => (format!("{body} #blessed #stressed"), false),
            18 => (body.clone(), false),
            _ => match out.iter().find(|t| !t.has_media) {
                // Exact duplicate of an earlier tweet.
                Some(prev) => (prev.text.clone(), false),
                None => (format!("{body} #stressed"), false),
            },
        };
        out.push(RawTweet { text, has_media });
    }
    out
}
