//! Synthetic corpora with a planted, fully separable signal.
//!
//! The generator records where it planted the label-determining tokens, so it
//! doubles as the ground truth for checking that trained detectors and their
//! explanations attend to the right place.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleRecord, ClaimRecord, Corpus, Label};
use crate::rng;

pub const HEADLINE_TRIGGERS_FAKE: &[&str] = &[
    "hoax", "shocking", "secretly", "banned", "exposed", "miracle", "outrage", "leaked",
];
pub const HEADLINE_TRIGGERS_TRUE: &[&str] = &[
    "announced", "confirmed", "official", "report", "approved", "study", "quarterly", "statement",
];
pub const ARTICLE_TRIGGERS_FAKE: &[&str] = &[
    "fabricated", "debunked", "satire", "unverified", "rumor", "doctored",
];
pub const ARTICLE_TRIGGERS_TRUE: &[&str] = &[
    "verified", "documented", "corroborated", "sourced", "attributed", "published",
];

const TOPICS: &[&str] = &["politics", "business", "health", "crime"];
const CONSONANTS: &[char] = &['b', 'd', 'f', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z'];
const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalMode {
    /// Label carried by trigger words in the headline and in one sentence of one article.
    Triggers,
    /// Label carried only by the article source domain; all text is filler.
    SourceOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub stories: usize,
    pub articles_per_story: usize,
    pub sentences_per_article: (usize, usize),
    pub words_per_sentence: (usize, usize),
    pub headline_words: (usize, usize),
    pub filler_vocabulary: usize,
    pub neutral_sources: usize,
    pub mode: SignalMode,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            stories: 2000,
            articles_per_story: 3,
            sentences_per_article: (4, 6),
            words_per_sentence: (6, 9),
            headline_words: (7, 11),
            filler_vocabulary: 300,
            neutral_sources: 12,
            mode: SignalMode::Triggers,
            seed: 7,
        }
    }
}

/// What the generator planted in one story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSignal {
    pub story_id: String,
    pub label: Label,
    pub headline_trigger: Option<String>,
    /// Token position of the trigger within the headline.
    pub headline_trigger_index: Option<usize>,
    pub signal_article_id: Option<String>,
    /// Sentence position of the planted sentence within the signal article body.
    pub signal_sentence_index: Option<usize>,
    pub article_trigger: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub claims: Vec<ClaimRecord>,
    pub articles: Vec<ArticleRecord>,
    pub planted: BTreeMap<String, PlantedSignal>,
}

impl SyntheticCorpus {
    pub fn corpus(&self) -> Corpus {
        Corpus::from_records(self.claims.clone(), self.articles.clone())
            .expect("generated corpus is well formed")
    }
}

/// Pronounceable consonant-vowel filler words; never collide with the triggers.
pub fn filler_words(n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut i = 0usize;
    while out.len() < n {
        let mut w = String::new();
        let mut k = i;
        let syllables = 2 + (i % 2);
        for _ in 0..syllables {
            w.push(CONSONANTS[k % CONSONANTS.len()]);
            k /= CONSONANTS.len();
            w.push(VOWELS[k % VOWELS.len()]);
            k /= VOWELS.len();
        }
        w.push_str(&i.to_string());
        out.push(w);
        i += 1;
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn filler_sentence(r: &mut rng::Rng, words: &[String], len: usize) -> Vec<String> {
    (0..len).map(|_| words.choose(r).unwrap().clone()).collect()
}

fn render_sentence(tokens: &[String]) -> String {
    let mut s = tokens.join(" ");
    s = capitalize(&s);
    s.push('.');
    s
}

pub fn generate(cfg: &SynthConfig) -> SyntheticCorpus {
    let mut r = rng::seeded(cfg.seed, "synth");
    let filler = filler_words(cfg.filler_vocabulary);
    let neutral: Vec<String> = (0..cfg.neutral_sources.max(1))
        .map(|k| format!("newsdesk{k}.com"))
        .collect();
    let fake_sources: Vec<String> = (0..4).map(|k| format!("rumormill{k}.net")).collect();
    let true_sources: Vec<String> = (0..4).map(|k| format!("recordwire{k}.org")).collect();

    let mut claims = Vec::with_capacity(cfg.stories);
    let mut articles = Vec::new();
    let mut planted = BTreeMap::new();
    for i in 0..cfg.stories {
        let story_id = format!("syn{i:05}");
        let label = if r.random_bool(0.5) { Label::Fake } else { Label::True };
        let topic = TOPICS.choose(&mut r).unwrap().to_string();

        let hl_len = r.random_range(cfg.headline_words.0..=cfg.headline_words.1);
        let mut headline = filler_sentence(&mut r, &filler, hl_len);
        let mut signal = PlantedSignal {
            story_id: story_id.clone(),
            label,
            headline_trigger: None,
            headline_trigger_index: None,
            signal_article_id: None,
            signal_sentence_index: None,
            article_trigger: None,
        };
        if cfg.mode == SignalMode::Triggers {
            let pool = if label.is_fake() {
                HEADLINE_TRIGGERS_FAKE
            } else {
                HEADLINE_TRIGGERS_TRUE
            };
            let trigger = pool.choose(&mut r).unwrap().to_string();
            let pos = r.random_range(0..=headline.len());
            headline.insert(pos, trigger.clone());
            signal.headline_trigger = Some(trigger);
            signal.headline_trigger_index = Some(pos);
        }
        let headline_text = capitalize(&headline.join(" "));

        let signal_article = r.random_range(0..cfg.articles_per_story.max(1));
        for j in 0..cfg.articles_per_story {
            let article_id = format!("{story_id}-a{j}");
            let n_sent = r.random_range(cfg.sentences_per_article.0..=cfg.sentences_per_article.1);
            let mut sentences: Vec<Vec<String>> = (0..n_sent)
                .map(|_| {
                    let len = r.random_range(cfg.words_per_sentence.0..=cfg.words_per_sentence.1);
                    filler_sentence(&mut r, &filler, len)
                })
                .collect();
            if cfg.mode == SignalMode::Triggers && j == signal_article && n_sent > 0 {
                let pool = if label.is_fake() {
                    ARTICLE_TRIGGERS_FAKE
                } else {
                    ARTICLE_TRIGGERS_TRUE
                };
                let trigger = pool.choose(&mut r).unwrap().to_string();
                let s_idx = r.random_range(0..n_sent);
                let pos = r.random_range(0..=sentences[s_idx].len());
                sentences[s_idx].insert(pos, trigger.clone());
                signal.signal_article_id = Some(article_id.clone());
                signal.signal_sentence_index = Some(s_idx);
                signal.article_trigger = Some(trigger);
            }
            let body = sentences
                .iter()
                .map(|s| render_sentence(s))
                .collect::<Vec<_>>()
                .join(" ");
            let title_len = r.random_range(3..=6);
            let title = capitalize(&filler_sentence(&mut r, &filler, title_len).join(" "));
            let source = match cfg.mode {
                SignalMode::Triggers => neutral.choose(&mut r).unwrap().clone(),
                SignalMode::SourceOnly if label.is_fake() => fake_sources.choose(&mut r).unwrap().clone(),
                SignalMode::SourceOnly => true_sources.choose(&mut r).unwrap().clone(),
            };
            articles.push(ArticleRecord {
                article_id,
                story_id: story_id.clone(),
                title,
                body,
                source: format!("https://www.{source}/story/{i}/{j}"),
                search_rank: j as u32 + 1,
            });
        }
        claims.push(ClaimRecord {
            story_id: story_id.clone(),
            headline: headline_text,
            label,
            topic,
        });
        planted.insert(story_id, signal);
    }
    SyntheticCorpus {
        claims,
        articles,
        planted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{split_sentences, tokenize};

    #[test]
    fn planted_positions_are_accurate() {
        let cfg = SynthConfig {
            stories: 50,
            ..SynthConfig::default()
        };
        let s = generate(&cfg);
        let corpus = s.corpus();
        assert_eq!(corpus.len(), 50);
        assert_eq!(corpus.article_count(), 150);
        for story in corpus.stories() {
            let p = &s.planted[&story.story_id];
            let toks = tokenize(&story.headline);
            let idx = p.headline_trigger_index.unwrap();
            assert_eq!(&toks[idx], p.headline_trigger.as_ref().unwrap());
            let art = story
                .articles
                .iter()
                .find(|a| Some(&a.article_id) == p.signal_article_id.as_ref())
                .unwrap();
            let sent = &split_sentences(&art.body)[p.signal_sentence_index.unwrap()];
            assert!(tokenize(sent).contains(p.article_trigger.as_ref().unwrap()));
            let trigger_pool = if story.label.is_fake() {
                HEADLINE_TRIGGERS_FAKE
            } else {
                HEADLINE_TRIGGERS_TRUE
            };
            assert!(trigger_pool.contains(&p.headline_trigger.as_deref().unwrap()));
        }
    }

    #[test]
    fn filler_never_collides_with_triggers() {
        let words = filler_words(1000);
        for t in HEADLINE_TRIGGERS_FAKE
            .iter()
            .chain(HEADLINE_TRIGGERS_TRUE)
            .chain(ARTICLE_TRIGGERS_FAKE)
            .chain(ARTICLE_TRIGGERS_TRUE)
        {
            assert!(!words.iter().any(|w| w == t));
        }
        let unique: std::collections::BTreeSet<_> = words.iter().collect();
        assert_eq!(unique.len(), 1000);
    }

    #[test]
    fn source_mode_has_no_text_signal() {
        let cfg = SynthConfig {
            stories: 40,
            mode: SignalMode::SourceOnly,
            ..SynthConfig::default()
        };
        let s = generate(&cfg);
        let corpus = s.corpus();
        for story in corpus.stories() {
            assert!(s.planted[&story.story_id].headline_trigger.is_none());
            for a in &story.articles {
                let expected = if story.label.is_fake() { "rumormill" } else { "recordwire" };
                assert!(a.source.starts_with(expected), "{}", a.source);
            }
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig {
            stories: 20,
            ..SynthConfig::default()
        };
        assert_eq!(generate(&cfg).claims, generate(&cfg).claims);
        assert_eq!(generate(&cfg).articles, generate(&cfg).articles);
    }
}
