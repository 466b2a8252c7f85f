//! Tokenization, vocabulary construction, padding/truncation, corpus file I/O
//! and the interview train/test split.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Reserved index for sequence padding.
pub const PAD: usize = 0;
/// Reserved index for out-of-vocabulary tokens.
pub const UNK: usize = 1;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Default sequence length; every encoded utterance is padded/truncated to it.
pub const MAX_LEN: usize = 35;

/// Which corpus an utterance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Interview,
    Twitter,
}

/// One labeled utterance as stored in corpus files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawUtterance {
    pub text: String,
    /// 0 = unstressed, 1 = stressed.
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<String>,
}

impl RawUtterance {
    pub fn new(text: impl Into<String>, label: u8, source: Source) -> Self {
        Self {
            text: text.into(),
            label,
            source: Some(source),
            speaker: None,
        }
    }
}

/// Lowercase, split on whitespace, peel leading/trailing ASCII punctuation into
/// separate tokens. Interior punctuation stays put, so contractions like
/// "don't" survive as one token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.to_lowercase().split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && chars[start].is_ascii_punctuation() {
            start += 1;
        }
        while end > start && chars[end - 1].is_ascii_punctuation() {
            end -= 1;
        }
        for c in &chars[..start] {
            out.push(c.to_string());
        }
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        for c in &chars[end..] {
            out.push(c.to_string());
        }
    }
    out
}

/// Bidirectional token↔index map with reserved PAD and UNK entries. Frozen
/// after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Build from token sequences. Tokens with frequency >= `min_count` are
    /// assigned indices in frequency-then-lexicographic order after PAD/UNK.
    pub fn build<'a, I, S>(corpora: I, min_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a String>,
    {
        if min_count < 1 {
            return Err(Error::Config("min_count must be >= 1".into()));
        }
        let mut counts: HashMap<&'a String, usize> = HashMap::new();
        let mut saw_any = false;
        for seq in corpora {
            for token in seq {
                saw_any = true;
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        if !saw_any {
            return Err(Error::Data("cannot build a vocabulary from no tokens".into()));
        }
        let mut kept: Vec<(&String, usize)> = counts
            .into_iter()
            .filter(|(_, n)| *n >= min_count)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        tokens.extend(kept.into_iter().map(|(t, _)| t.clone()));
        Self::from_tokens(tokens)
    }

    /// Rebuild from an ordered token list (index = position). The first two
    /// entries must be the PAD and UNK markers.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[UNK] != UNK_TOKEN {
            return Err(Error::Data(format!(
                "vocabulary must start with {PAD_TOKEN} and {UNK_TOKEN}"
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self { index, tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // PAD and UNK are always present
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token_at(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(|s| s.as_str())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// FNV-1a over the ordered token list; used to detect vocabulary mismatch
    /// between a model file and an externally supplied vocabulary.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for t in &self.tokens {
            for b in t.as_bytes() {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x100000001b3);
            }
            h ^= 0xff;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    /// One token per line, line number − 1 = index.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = BufWriter::new(file);
        for t in &self.tokens {
            writeln!(w, "{t}").map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let tokens: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_tokens(tokens)
    }
}

/// Token indices padded to `max_len` plus the matching real-token mask.
pub fn encode(vocab: &Vocabulary, tokens: &[String], max_len: usize) -> Result<(Vec<usize>, Vec<bool>)> {
    if tokens.is_empty() {
        return Err(Error::Data(
            "cannot encode an empty token sequence (no unmasked positions)".into(),
        ));
    }
    let mut ids = Vec::with_capacity(max_len);
    let mut mask = Vec::with_capacity(max_len);
    for t in tokens.iter().take(max_len) {
        ids.push(vocab.index_of(t).unwrap_or(UNK));
        mask.push(true);
    }
    while ids.len() < max_len {
        ids.push(PAD);
        mask.push(false);
    }
    Ok((ids, mask))
}

/// An encoded utterance ready for the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub ids: Vec<usize>,
    pub mask: Vec<bool>,
    pub label: u8,
}

impl Example {
    pub fn from_utterance(vocab: &Vocabulary, utt: &RawUtterance, max_len: usize) -> Result<Self> {
        let tokens = tokenize(&utt.text);
        let (ids, mask) = encode(vocab, &tokens, max_len)?;
        Ok(Self {
            ids,
            mask,
            label: utt.label,
        })
    }
}

/// Anything carrying a binary class label; lets sampling and oversampling
/// work on raw utterances and encoded examples alike.
pub trait Labeled {
    fn label(&self) -> u8;
}

impl Labeled for Example {
    fn label(&self) -> u8 {
        self.label
    }
}

impl Labeled for RawUtterance {
    fn label(&self) -> u8 {
        self.label
    }
}

/// Parameters of the interview train/test split.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub test_per_class: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_per_class: 160,
            seed: 42,
        }
    }
}

/// Seeded uniform sample of exactly `test_per_class` utterances per class into
/// the test set; the remainder is the training set.
pub fn split_interview(
    examples: &[RawUtterance],
    spec: &SplitSpec,
) -> Result<(Vec<RawUtterance>, Vec<RawUtterance>)> {
    if spec.test_per_class < 1 {
        return Err(Error::Config("test_per_class must be >= 1".into()));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, u) in examples.iter().enumerate() {
        by_class[usize::from(u.label)].push(i);
    }
    for (label, members) in by_class.iter().enumerate() {
        if members.len() < spec.test_per_class {
            return Err(Error::Data(format!(
                "class {label} has {} examples, need at least {} for the test split",
                members.len(),
                spec.test_per_class
            )));
        }
    }
    let mut rng = rng::stream(spec.seed, "interview-split", 0);
    let mut in_test = vec![false; examples.len()];
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter().take(spec.test_per_class) {
            in_test[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, u) in examples.iter().enumerate() {
        if in_test[i] {
            test.push(u.clone());
        } else {
            train.push(u.clone());
        }
    }
    Ok((train, test))
}

/// Corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    /// `.tsv` maps to TSV, everything else to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

fn validate_utterance(u: &RawUtterance, line: usize) -> Result<()> {
    if u.label > 1 {
        return Err(Error::Parse {
            line,
            msg: format!("label must be 0 or 1, got {}", u.label),
        });
    }
    if u.text.trim().is_empty() {
        return Err(Error::Parse {
            line,
            msg: "utterance text is empty".into(),
        });
    }
    Ok(())
}

/// Load a corpus file, preserving order. Malformed lines are reported with
/// their 1-based line number.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<RawUtterance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let utt = match format {
            CorpusFormat::Jsonl => parse_jsonl_line(&line, lineno)?,
            CorpusFormat::Tsv => parse_tsv_line(&line, lineno)?,
        };
        validate_utterance(&utt, lineno)?;
        out.push(utt);
    }
    Ok(out)
}

fn parse_jsonl_line(line: &str, lineno: usize) -> Result<RawUtterance> {
    // Parse the label by hand first so out-of-domain values (e.g. 2) surface
    // as a labeled data error rather than a generic serde type error.
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: lineno,
        msg: e.to_string(),
    })?;
    let label = value
        .get("label")
        .and_then(|v| v.as_i64())
        .ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "missing or non-integer \"label\" field".into(),
        })?;
    if !(0..=1).contains(&label) {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("label must be 0 or 1, got {label}"),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::Parse {
        line: lineno,
        msg: e.to_string(),
    })
}

fn parse_tsv_line(line: &str, lineno: usize) -> Result<RawUtterance> {
    let (label, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
        line: lineno,
        msg: "expected label<TAB>text".into(),
    })?;
    let label: u8 = label.trim().parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("label must be 0 or 1, got {label:?}"),
    })?;
    Ok(RawUtterance {
        text: text.to_string(),
        label,
        source: None,
        speaker: None,
    })
}

/// Write a corpus file; inverse of [`load_corpus`].
pub fn store_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    corpus: &[RawUtterance],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    for utt in corpus {
        match format {
            CorpusFormat::Jsonl => {
                let line = serde_json::to_string(utt)
                    .map_err(|e| Error::Data(format!("serialize utterance: {e}")))?;
                writeln!(w, "{line}").map_err(|e| Error::io(path.display().to_string(), e))?;
            }
            CorpusFormat::Tsv => {
                if utt.text.contains('\t') || utt.text.contains('\n') {
                    return Err(Error::Data(
                        "TSV format cannot store text containing tabs or newlines".into(),
                    ));
                }
                writeln!(w, "{}\t{}", utt.label, utt.text)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
            }
        }
    }
    Ok(())
}
