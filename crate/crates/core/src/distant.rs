//! Distant supervision over tweets: hashtag lexicon, filtering heuristics,
//! corpus assembly with deduplication, and balanced per-class sampling.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{Labeled, RawUtterance, Source};
use crate::error::{Error, Result};
use crate::rng;

const STRESSED_TAGS: [&str; 41] = [
    "amstressed",
    "busylife",
    "collegestress",
    "distress",
    "distressed",
    "familystress",
    "feelingbusy",
    "feelingfrustrated",
    "feelingoverwhelmed",
    "feelingstress",
    "feelstress",
    "feelstressed",
    "frustrated",
    "frustrating",
    "frustration",
    "iamstressed",
    "ifrustrated",
    "imstressed",
    "overwhelm",
    "overwhelmed",
    "overwhelming",
    "panic",
    "sostress",
    "sostressed",
    "sostressful",
    "stress",
    "stressed",
    "stressedlife",
    "stressedout",
    "stresses",
    "stressful",
    "stressfulllife",
    "stressingout",
    "stresslife",
    "stressor",
    "stressors",
    "stresss",
    "stressss",
    "stresssss",
    "verystressed",
    "workstress",
];

const UNSTRESSED_TAGS: [&str; 15] = [
    "blessed",
    "comfort",
    "feelingrelax",
    "feelingrelaxed",
    "grateful",
    "iamblessed",
    "iamgrateful",
    "iamrelaxed",
    "imblessed",
    "imgrateful",
    "nostress",
    "peaceful",
    "relax",
    "relaxed",
    "relaxing",
];

/// Labeling lexicon: lowercase tags without '#', one disjoint set per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagLexicon {
    stressed: BTreeSet<String>,
    unstressed: BTreeSet<String>,
}

impl Default for HashtagLexicon {
    fn default() -> Self {
        Self {
            stressed: STRESSED_TAGS.iter().map(|t| t.to_string()).collect(),
            unstressed: UNSTRESSED_TAGS.iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl HashtagLexicon {
    pub fn new(stressed: BTreeSet<String>, unstressed: BTreeSet<String>) -> Result<Self> {
        if stressed.is_empty() || unstressed.is_empty() {
            return Err(Error::Config(
                "lexicon needs at least one tag per class".into(),
            ));
        }
        for tag in stressed.iter().chain(&unstressed) {
            if tag.contains('#') || tag.contains(char::is_whitespace) || tag.is_empty() {
                return Err(Error::Config(format!(
                    "lexicon tag {tag:?} must be a bare lowercase word"
                )));
            }
            if tag.chars().any(|c| c.is_uppercase()) {
                return Err(Error::Config(format!("lexicon tag {tag:?} must be lowercase")));
            }
        }
        let overlap: Vec<&String> = stressed.intersection(&unstressed).collect();
        if !overlap.is_empty() {
            return Err(Error::Config(format!(
                "lexicon classes overlap on {overlap:?}"
            )));
        }
        Ok(Self {
            stressed,
            unstressed,
        })
    }

    /// Parses the two-section file format: `[stressed]` / `[unstressed]`
    /// headers with one tag per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stressed = BTreeSet::new();
        let mut unstressed = BTreeSet::new();
        let mut current: Option<u8> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[stressed]" => current = Some(1),
                "[unstressed]" => current = Some(0),
                other if other.starts_with('[') => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("unknown lexicon section {other}"),
                    });
                }
                tag => match current {
                    Some(1) => {
                        stressed.insert(tag.to_lowercase());
                    }
                    Some(0) => {
                        unstressed.insert(tag.to_lowercase());
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: i + 1,
                            msg: "tag appears before any section header".into(),
                        });
                    }
                },
            }
        }
        Self::new(stressed, unstressed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_file_format(&self) -> String {
        let mut out = String::from("[stressed]\n");
        for tag in &self.stressed {
            writeln!(out, "{tag}").expect("string write");
        }
        out.push_str("[unstressed]\n");
        for tag in &self.unstressed {
            writeln!(out, "{tag}").expect("string write");
        }
        out
    }

    pub fn stressed(&self) -> &BTreeSet<String> {
        &self.stressed
    }

    pub fn unstressed(&self) -> &BTreeSet<String> {
        &self.unstressed
    }

    /// Class of a bare tag: 1 stressed, 0 unstressed, None when unknown.
    pub fn label_of(&self, tag: &str) -> Option<u8> {
        if self.stressed.contains(tag) {
            Some(1)
        } else if self.unstressed.contains(tag) {
            Some(0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawTweet {
    pub text: String,
    #[serde(default)]
    pub has_media: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Input text empty, or nothing left after stripping label hashtags.
    EmptyText,
    Url,
    Media,
    HashtagNotTerminal,
    TooManyHashtags,
    NoLabelTag,
    ConflictingTags,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    Keep { label: u8, text: String },
    Reject(RejectReason),
}

/// Per-reason rejection counters; together with `kept` and `duplicates` they
/// partition the input count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub input: usize,
    pub kept: usize,
    pub empty_text: usize,
    pub url: usize,
    pub media: usize,
    pub hashtag_not_terminal: usize,
    pub too_many_hashtags: usize,
    pub no_label_tag: usize,
    pub conflicting_tags: usize,
    pub duplicates: usize,
}

impl FilterReport {
    fn count_reject(&mut self, reason: RejectReason) {
        match reason {
            RejectReason::EmptyText => self.empty_text += 1,
            RejectReason::Url => self.url += 1,
            RejectReason::Media => self.media += 1,
            RejectReason::HashtagNotTerminal => self.hashtag_not_terminal += 1,
            RejectReason::TooManyHashtags => self.too_many_hashtags += 1,
            RejectReason::NoLabelTag => self.no_label_tag += 1,
            RejectReason::ConflictingTags => self.conflicting_tags += 1,
        }
    }

    /// Every input tweet lands in exactly one counter.
    pub fn is_partition(&self) -> bool {
        self.kept
            + self.empty_text
            + self.url
            + self.media
            + self.hashtag_not_terminal
            + self.too_many_hashtags
            + self.no_label_tag
            + self.conflicting_tags
            + self.duplicates
            == self.input
    }
}

fn is_hashtag(token: &str) -> bool {
    token.len() > 1 && token.starts_with('#')
}

/// Bare lowercase tag of a hashtag token, trailing punctuation trimmed.
fn tag_of(token: &str) -> String {
    token[1..]
        .trim_end_matches(|c: char| c.is_ascii_punctuation())
        .to_lowercase()
}

fn looks_like_url(token: &str) -> bool {
    let t = token.to_lowercase();
    t.contains("http://")
        || t.contains("https://")
        || t.starts_with("www.")
        || t == "t.co"
        || t.starts_with("t.co/")
}

/// Applies the keep/reject heuristics to one tweet: no URLs or media, the
/// final token must be a hashtag, fewer than four hashtags in total, and the
/// hashtags must match exactly one lexicon class. Kept text has lexicon
/// hashtags stripped and the '#' removed from the rest.
pub fn filter_tweet(tweet: &RawTweet, lex: &HashtagLexicon) -> FilterOutcome {
    let tokens: Vec<&str> = tweet.text.split_whitespace().collect();
    if tokens.is_empty() {
        return FilterOutcome::Reject(RejectReason::EmptyText);
    }
    if tokens.iter().any(|t| looks_like_url(t)) {
        return FilterOutcome::Reject(RejectReason::Url);
    }
    if tweet.has_media {
        return FilterOutcome::Reject(RejectReason::Media);
    }
    if !is_hashtag(tokens[tokens.len() - 1]) {
        return FilterOutcome::Reject(RejectReason::HashtagNotTerminal);
    }
    let hashtags: Vec<String> = tokens
        .iter()
        .filter(|t| is_hashtag(t))
        .map(|t| tag_of(t))
        .collect();
    if hashtags.len() >= 4 {
        return FilterOutcome::Reject(RejectReason::TooManyHashtags);
    }
    let stressed_hit = hashtags.iter().any(|t| lex.stressed.contains(t));
    let unstressed_hit = hashtags.iter().any(|t| lex.unstressed.contains(t));
    let label = match (stressed_hit, unstressed_hit) {
        (true, true) => return FilterOutcome::Reject(RejectReason::ConflictingTags),
        (false, false) => return FilterOutcome::Reject(RejectReason::NoLabelTag),
        (true, false) => 1,
        (false, true) => 0,
    };
    let mut cleaned: Vec<&str> = Vec::with_capacity(tokens.len());
    for token in &tokens {
        if is_hashtag(token) {
            if lex.label_of(&tag_of(token)).is_some() {
                continue;
            }
            cleaned.push(&token[1..]);
        } else {
            cleaned.push(token);
        }
    }
    if cleaned.is_empty() {
        return FilterOutcome::Reject(RejectReason::EmptyText);
    }
    FilterOutcome::Keep {
        label,
        text: cleaned.join(" "),
    }
}

/// Filters a tweet stream into a labeled corpus, dropping exact cleaned-text
/// duplicates after the first occurrence.
pub fn build_twitter_corpus(
    tweets: &[RawTweet],
    lex: &HashtagLexicon,
) -> (Vec<RawUtterance>, FilterReport) {
    let mut report = FilterReport {
        input: tweets.len(),
        ..FilterReport::default()
    };
    let mut seen: HashSet<String> = HashSet::new();
    let mut corpus = Vec::new();
    for tweet in tweets {
        match filter_tweet(tweet, lex) {
            FilterOutcome::Reject(reason) => report.count_reject(reason),
            FilterOutcome::Keep { label, text } => {
                if seen.insert(text.clone()) {
                    report.kept += 1;
                    corpus.push(RawUtterance::new(text, label, Source::Twitter));
                } else {
                    report.duplicates += 1;
                }
            }
        }
    }
    debug_assert!(report.is_partition());
    (corpus, report)
}

/// Reads tweets from a JSONL file with fields `text` and optional `has_media`.
pub fn load_tweets(path: &Path) -> Result<Vec<RawTweet>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tweets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tweet: RawTweet = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        tweets.push(tweet);
    }
    Ok(tweets)
}

/// Seeded draw of `per_class` items from each label. Classes at least that
/// large are sampled without replacement; smaller ones with replacement plus
/// a warning. Output is the class-0 draw followed by the class-1 draw.
pub fn sample_balanced<T: Labeled + Clone>(
    items: &[T],
    per_class: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if per_class == 0 {
        return Err(Error::Config("per-class sample size must be at least 1".into()));
    }
    let mut r = rng::stream(seed, "sample-balanced", 0);
    let mut out = Vec::with_capacity(2 * per_class);
    for label in [0u8, 1u8] {
        let class: Vec<&T> = items.iter().filter(|x| x.label() == label).collect();
        if class.is_empty() {
            return Err(Error::Data(format!("no examples with label {label} to sample")));
        }
        if class.len() >= per_class {
            let picked =
                rand::seq::IndexedRandom::choose_multiple(class.as_slice(), &mut r, per_class);
            out.extend(picked.map(|x| (*x).clone()));
        } else {
            warn!(
                "class {label} has {} examples, sampling {per_class} with replacement",
                class.len()
            );
            for _ in 0..per_class {
                let pick = rand::Rng::random_range(&mut r, 0..class.len());
                out.push(class[pick].clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(text: &str) -> RawTweet {
        RawTweet {
            text: text.to_string(),
            has_media: false,
        }
    }

    #[test]
    fn default_lexicon_reproduces_published_tag_sets() {
        let lex = HashtagLexicon::default();
        assert_eq!(lex.stressed().len(), 41);
        assert_eq!(lex.unstressed().len(), 15);
        assert!(lex.stressed().contains("amstressed"));
        assert!(lex.stressed().contains("workstress"));
        assert!(lex.unstressed().contains("blessed"));
        assert!(lex.unstressed().contains("relaxing"));
        assert!(lex.stressed().is_disjoint(lex.unstressed()));
        assert_eq!(lex.label_of("stressed"), Some(1));
        assert_eq!(lex.label_of("comfort"), Some(0));
        assert_eq!(lex.label_of("sunny"), None);
    }

    #[test]
    fn lexicon_file_format_round_trips() {
        let lex = HashtagLexicon::default();
        let parsed = HashtagLexicon::parse(&lex.to_file_format()).unwrap();
        assert_eq!(parsed, lex);
    }

    #[test]
    fn lexicon_rejects_overlap_and_malformed_tags() {
        let text = "[stressed]\nfoo\n[unstressed]\nfoo\n";
        assert!(matches!(HashtagLexicon::parse(text), Err(Error::Config(_))));
        let text = "foo\n[stressed]\nbar\n";
        assert!(matches!(HashtagLexicon::parse(text), Err(Error::Parse { line: 1, .. })));
        let text = "[stress-levels]\nfoo\n";
        assert!(matches!(HashtagLexicon::parse(text), Err(Error::Parse { .. })));
        let bad: BTreeSet<String> = ["#tag".to_string()].into();
        let other: BTreeSet<String> = ["ok".to_string()].into();
        assert!(HashtagLexicon::new(bad, other).is_err());
    }

    #[test]
    fn keeps_terminal_lexicon_hashtag_and_strips_it() {
        let lex = HashtagLexicon::default();
        let out = filter_tweet(&tweet("deadline after deadline #stressed"), &lex);
        assert_eq!(
            out,
            FilterOutcome::Keep {
                label: 1,
                text: "deadline after deadline".to_string()
            }
        );
    }

    #[test]
    fn rejects_urls() {
        let lex = HashtagLexicon::default();
        for text in [
            "see pic http://t.co/x #stressed",
            "see pic https://example.com #stressed",
            "go to www.example.com now #stressed",
            "shortened t.co/abc123 #stressed",
        ] {
            assert_eq!(
                filter_tweet(&tweet(text), &lex),
                FilterOutcome::Reject(RejectReason::Url),
                "{text}"
            );
        }
    }

    #[test]
    fn rejects_media_flag() {
        let lex = HashtagLexicon::default();
        let t = RawTweet {
            text: "look at this #stressed".to_string(),
            has_media: true,
        };
        assert_eq!(filter_tweet(&t, &lex), FilterOutcome::Reject(RejectReason::Media));
    }

    #[test]
    fn rejects_non_terminal_hashtag_before_counting() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("#a #b #c #stressed done"), &lex),
            FilterOutcome::Reject(RejectReason::HashtagNotTerminal)
        );
    }

    #[test]
    fn rejects_four_or_more_hashtags() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("x #a #b #c #stressed"), &lex),
            FilterOutcome::Reject(RejectReason::TooManyHashtags)
        );
        // Three hashtags stay under the limit.
        assert_eq!(
            filter_tweet(&tweet("x #a #b #stressed"), &lex),
            FilterOutcome::Keep {
                label: 1,
                text: "x a b".to_string()
            }
        );
    }

    #[test]
    fn rejects_conflicting_and_unknown_tags() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("great day #blessed #stressed"), &lex),
            FilterOutcome::Reject(RejectReason::ConflictingTags)
        );
        assert_eq!(
            filter_tweet(&tweet("nice weather #sunny"), &lex),
            FilterOutcome::Reject(RejectReason::NoLabelTag)
        );
    }

    #[test]
    fn keeps_non_lexicon_hashtags_without_marker() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("busy #monday grind #stressed"), &lex),
            FilterOutcome::Keep {
                label: 1,
                text: "busy monday grind".to_string()
            }
        );
    }

    #[test]
    fn rejects_tweet_that_is_only_its_label() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("#stressed"), &lex),
            FilterOutcome::Reject(RejectReason::EmptyText)
        );
        assert_eq!(
            filter_tweet(&tweet("   "), &lex),
            FilterOutcome::Reject(RejectReason::EmptyText)
        );
    }

    #[test]
    fn unstressed_tags_label_zero() {
        let lex = HashtagLexicon::default();
        assert_eq!(
            filter_tweet(&tweet("slow sunday morning #relaxed"), &lex),
            FilterOutcome::Keep {
                label: 0,
                text: "slow sunday morning".to_string()
            }
        );
    }

    #[test]
    fn corpus_report_partitions_the_stream() {
        let lex = HashtagLexicon::default();
        let tweets = vec![
            tweet("deadline after deadline #stressed"),
            tweet("see pic http://t.co/x #stressed"),
            tweet("#a #b #c #stressed done"),
            tweet("x #a #b #c #stressed"),
            tweet("great day #blessed #stressed"),
        ];
        let (corpus, report) = build_twitter_corpus(&tweets, &lex);
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.kept, 1);
        assert_eq!(report.url, 1);
        assert_eq!(report.hashtag_not_terminal, 1);
        assert_eq!(report.too_many_hashtags, 1);
        assert_eq!(report.conflicting_tags, 1);
        assert!(report.is_partition());
        assert_eq!(corpus[0].text, "deadline after deadline");
        assert_eq!(corpus[0].label, 1);
        assert_eq!(corpus[0].source, Some(Source::Twitter));
    }

    #[test]
    fn empty_stream_gives_empty_corpus_and_zero_report() {
        let lex = HashtagLexicon::default();
        let (corpus, report) = build_twitter_corpus(&[], &lex);
        assert!(corpus.is_empty());
        assert_eq!(report, FilterReport::default());
    }

    #[test]
    fn duplicate_cleaned_text_is_kept_once() {
        let lex = HashtagLexicon::default();
        let tweets = vec![
            tweet("same old grind #stressed"),
            tweet("same old grind #stressed"),
        ];
        let (corpus, report) = build_twitter_corpus(&tweets, &lex);
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.kept, 1);
        assert_eq!(report.duplicates, 1);
        assert!(report.is_partition());
    }

    #[derive(Clone)]
    struct Tagged(u8, usize);
    impl Labeled for Tagged {
        fn label(&self) -> u8 {
            self.0
        }
    }

    #[test]
    fn balanced_sample_draws_exact_counts() {
        let mut items = Vec::new();
        for i in 0..30 {
            items.push(Tagged(0, i));
        }
        for i in 0..8 {
            items.push(Tagged(1, 100 + i));
        }
        let sample = sample_balanced(&items, 5, 3).unwrap();
        assert_eq!(sample.len(), 10);
        assert_eq!(sample.iter().filter(|x| x.0 == 0).count(), 5);
        assert_eq!(sample.iter().filter(|x| x.0 == 1).count(), 5);
        // Without replacement inside the larger class.
        let mut zeros: Vec<usize> = sample.iter().filter(|x| x.0 == 0).map(|x| x.1).collect();
        zeros.sort_unstable();
        zeros.dedup();
        assert_eq!(zeros.len(), 5);
    }

    #[test]
    fn exhaustive_sample_returns_whole_class() {
        let items = vec![Tagged(0, 1), Tagged(0, 2), Tagged(1, 3), Tagged(1, 4)];
        let sample = sample_balanced(&items, 2, 0).unwrap();
        let mut ids: Vec<usize> = sample.iter().map(|x| x.1).collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![1, 2, 3, 4]);
    }

    #[test]
    fn undersized_class_samples_with_replacement() {
        let items = vec![Tagged(0, 1), Tagged(0, 2), Tagged(0, 3), Tagged(1, 9)];
        let sample = sample_balanced(&items, 3, 1).unwrap();
        assert_eq!(sample.iter().filter(|x| x.0 == 1).count(), 3);
        assert!(sample.iter().filter(|x| x.0 == 1).all(|x| x.1 == 9));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let items: Vec<Tagged> = (0..40)
            .map(|i| Tagged(u8::from(i % 2 == 0), i))
            .collect();
        let a: Vec<usize> = sample_balanced(&items, 6, 42).unwrap().iter().map(|x| x.1).collect();
        let b: Vec<usize> = sample_balanced(&items, 6, 42).unwrap().iter().map(|x| x.1).collect();
        let c: Vec<usize> = sample_balanced(&items, 6, 43).unwrap().iter().map(|x| x.1).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_rejects_missing_class_and_zero_size() {
        let items = vec![Tagged(0, 1)];
        assert!(matches!(sample_balanced(&items, 1, 0), Err(Error::Data(_))));
        assert!(matches!(sample_balanced(&items, 0, 0), Err(Error::Config(_))));
    }
}
