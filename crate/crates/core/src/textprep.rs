//! Tokenization, vocabularies, embedding tables and sentence segmentation.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot build a vocabulary from an empty training split")]
    EmptyTraining,
    #[error("{path}:{line}: {reason}")]
    BadEmbeddingLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Lowercased word tokens. Apostrophes and hyphens survive only between two
/// word characters ("don't", "covid-19"); all other punctuation splits.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if is_word_char(c) {
            cur.extend(c.to_lowercase());
        } else if matches!(c, '\'' | '’' | '-')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|&n| is_word_char(n))
        {
            cur.push(if c == '-' { '-' } else { '\'' });
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Sentence strings split on `.`, `!` or `?` followed by whitespace (or the end).
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        cur.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            let s = cur.trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
            cur.clear();
        }
    }
    let s = cur.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
    out
}

/// Token-to-id map with `<pad>` at 0 and `<unk>` at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    min_frequency: usize,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from training texts. Tokens seen fewer than
    /// `min_frequency` times are left out and map to `<unk>`. Ids are assigned
    /// by descending frequency, then lexicographically.
    pub fn build<'a, I>(texts: I, min_frequency: usize) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut any = false;
        for t in texts {
            any = true;
            for tok in tokenize(t) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        if !any {
            return Err(TextError::EmptyTraining);
        }
        let mut kept: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_frequency.max(1) && t != PAD_TOKEN && t != UNK_TOKEN)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        tokens.extend(kept.into_iter().map(|(t, _)| t));
        Ok(Self::from_tokens(tokens, min_frequency))
    }

    /// Rebuilds from an ordered token list (first two must be the reserved tokens).
    pub fn from_tokens(tokens: Vec<String>, min_frequency: usize) -> Self {
        let lookup = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            tokens,
            min_frequency,
            lookup,
        }
    }

    /// Restores the lookup table after deserialization.
    pub fn reindex(mut self) -> Self {
        self.lookup = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn min_frequency(&self) -> usize {
        self.min_frequency
    }

    pub fn id(&self, token: &str) -> u32 {
        self.lookup.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains_key(token)
    }

    pub fn token(&self, id: u32) -> &str {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .unwrap_or(UNK_TOKEN)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Hex SHA-256 over the ordered token list; identifies the id assignment.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}

/// Truncation bounds for model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextBounds {
    pub max_sentences: usize,
    pub max_tokens_per_sentence: usize,
    pub max_headline_tokens: usize,
    /// Bound on the flat article token sequence fed to recurrent article encoders.
    pub max_article_tokens: usize,
}

impl Default for TextBounds {
    fn default() -> Self {
        Self {
            max_sentences: 30,
            max_tokens_per_sentence: 50,
            max_headline_tokens: 32,
            max_article_tokens: 200,
        }
    }
}

/// An article body as a list of token-id sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedArticle {
    pub sentences: Vec<Vec<u32>>,
    /// Original text of each retained sentence, parallel to `sentences`.
    pub texts: Vec<String>,
    pub max_sentences: usize,
    pub max_tokens_per_sentence: usize,
}

impl SegmentedArticle {
    pub fn flat_tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.sentences.iter().flatten().copied()
    }
}

/// Splits a body into sentences and encodes each. Sentences without any word
/// token are dropped; then the sentence and token bounds are applied.
pub fn segment_sentences(body: &str, vocab: &Vocabulary, bounds: &TextBounds) -> SegmentedArticle {
    let mut sentences = Vec::new();
    let mut texts = Vec::new();
    for s in split_sentences(body) {
        if sentences.len() == bounds.max_sentences {
            break;
        }
        let toks = tokenize(&s);
        if toks.is_empty() {
            continue;
        }
        let ids: Vec<u32> = toks
            .iter()
            .take(bounds.max_tokens_per_sentence)
            .map(|t| vocab.id(t))
            .collect();
        sentences.push(ids);
        texts.push(s);
    }
    SegmentedArticle {
        sentences,
        texts,
        max_sentences: bounds.max_sentences,
        max_tokens_per_sentence: bounds.max_tokens_per_sentence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingSource {
    PretrainedFile,
    RandomInit,
}

/// One row per vocabulary id; the padding row is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dimension: usize,
    pub vectors: Array2<f64>,
    pub source: EmbeddingSource,
}

const INIT_STD: f64 = 0.1;

impl EmbeddingTable {
    /// Normal(0, 0.1) rows, zero padding row.
    pub fn random(vocab: &Vocabulary, dimension: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed, "embedding");
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let mut vectors = Array2::from_shape_fn((vocab.len(), dimension), |_| normal.sample(&mut r));
        vectors.row_mut(PAD_ID as usize).fill(0.0);
        Self {
            dimension,
            vectors,
            source: EmbeddingSource::RandomInit,
        }
    }

    /// Loads "token v1 .. vd" lines; vocabulary tokens missing from the file
    /// keep their random Normal(0, 0.1) initialization.
    pub fn load_pretrained(
        path: &Path,
        vocab: &Vocabulary,
        dimension: usize,
        seed: u64,
    ) -> Result<Self, TextError> {
        let f = fs::File::open(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut table = Self::random(vocab, dimension, seed);
        table.source = EmbeddingSource::PretrainedFile;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let bad = |reason: String| TextError::BadEmbeddingLine {
                path: path.display().to_string(),
                line: i + 1,
                reason,
            };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>().map_err(|e| bad(format!("{p:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            if values.len() != dimension {
                return Err(bad(format!(
                    "expected {dimension} values, found {}",
                    values.len()
                )));
            }
            let id = vocab.id(token);
            if id == UNK_ID && token != UNK_TOKEN || id == PAD_ID {
                continue;
            }
            for (dst, v) in table.vectors.row_mut(id as usize).iter_mut().zip(values) {
                *dst = v;
            }
        }
        Ok(table)
    }

    pub fn rows(&self) -> usize {
        self.vectors.nrows()
    }
}
