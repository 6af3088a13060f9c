//! Turns corpus stories into the token-id structures the detectors consume.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use newsxai_core::corpus::{Label, NewsStory};
use newsxai_core::textprep::{segment_sentences, tokenize, TextBounds, TextError, Vocabulary};

/// Per-domain counts over the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SourceStats {
    /// domain -> (articles, fake articles)
    pub domains: BTreeMap<String, (usize, usize)>,
    pub total_articles: usize,
}

impl SourceStats {
    pub fn build<'a, I: IntoIterator<Item = &'a NewsStory>>(stories: I) -> Self {
        let mut s = Self::default();
        for story in stories {
            for a in &story.articles {
                let e = s.domains.entry(a.source.clone()).or_default();
                e.0 += 1;
                if a.noisy_label.is_fake() {
                    e.1 += 1;
                }
                s.total_articles += 1;
            }
        }
        s
    }

    /// Dense id per known domain, 0 for unknown. Ids follow sorted domain order.
    pub fn id(&self, domain: &str) -> u32 {
        self.domains
            .keys()
            .position(|d| d == domain)
            .map(|p| p as u32 + 1)
            .unwrap_or(0)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.domains.len() + 1
    }

    /// Share of training articles coming from `domain`.
    pub fn frequency(&self, domain: &str) -> f64 {
        match self.domains.get(domain) {
            Some((n, _)) if self.total_articles > 0 => *n as f64 / self.total_articles as f64,
            _ => 0.0,
        }
    }

    /// Laplace-smoothed probability that an article from `domain` is FAKE.
    pub fn fake_prior(&self, domain: &str) -> f64 {
        let (n, f) = self.domains.get(domain).copied().unwrap_or((0, 0));
        (f as f64 + 1.0) / (n as f64 + 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedArticle {
    pub article_id: String,
    pub source: String,
    pub source_id: u32,
    /// Flat body tokens, bounded by `max_article_tokens`.
    pub tokens: Vec<u32>,
    pub token_text: Vec<String>,
    pub sentences: Vec<Vec<u32>>,
    pub sentence_texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedStory {
    pub story_id: String,
    pub label: Label,
    pub headline: Vec<u32>,
    pub headline_tokens: Vec<String>,
    pub articles: Vec<EncodedArticle>,
}

/// Vocabulary, source statistics and truncation bounds shared by all four detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextEncoder {
    pub vocab: Vocabulary,
    pub sources: SourceStats,
    pub bounds: TextBounds,
}

impl TextEncoder {
    /// Fits the vocabulary and source statistics on training stories only.
    pub fn fit(train: &[&NewsStory], min_frequency: usize, bounds: TextBounds) -> Result<Self, TextError> {
        let texts = train.iter().flat_map(|s| {
            std::iter::once(s.headline.as_str()).chain(s.articles.iter().map(|a| a.body.as_str()))
        });
        let vocab = Vocabulary::build(texts, min_frequency)?;
        Ok(Self {
            vocab,
            sources: SourceStats::build(train.iter().copied()),
            bounds,
        })
    }

    /// Restores lookup tables after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.vocab = self.vocab.reindex();
        self
    }

    pub fn encode(&self, story: &NewsStory) -> EncodedStory {
        let mut headline_tokens = tokenize(&story.headline);
        headline_tokens.truncate(self.bounds.max_headline_tokens);
        let headline = self.vocab.encode(&headline_tokens);
        let articles = story
            .articles
            .iter()
            .map(|a| {
                let seg = segment_sentences(&a.body, &self.vocab, &self.bounds);
                let mut token_text = tokenize(&a.body);
                token_text.truncate(self.bounds.max_article_tokens);
                EncodedArticle {
                    article_id: a.article_id.clone(),
                    source: a.source.clone(),
                    source_id: self.sources.id(&a.source),
                    tokens: self.vocab.encode(&token_text),
                    token_text,
                    sentences: seg.sentences,
                    sentence_texts: seg.texts,
                }
            })
            .collect();
        EncodedStory {
            story_id: story.story_id.clone(),
            label: story.label,
            headline,
            headline_tokens,
            articles,
        }
    }

    pub fn encode_all<'a, I: IntoIterator<Item = &'a NewsStory>>(&self, stories: I) -> Vec<EncodedStory> {
        stories.into_iter().map(|s| self.encode(s)).collect()
    }

    pub fn vocab_hash(&self) -> String {
        self.vocab.hash()
    }
}

/// Both labels must be present to train a classifier.
pub fn check_two_classes(stories: &[EncodedStory]) -> Result<(), crate::ModelError> {
    let labels: BTreeSet<Label> = stories.iter().map(|s| s.label).collect();
    if stories.is_empty() {
        return Err(crate::ModelError::EmptyTraining);
    }
    if labels.len() < 2 {
        return Err(crate::ModelError::SingleClass(*labels.iter().next().unwrap()));
    }
    Ok(())
}
