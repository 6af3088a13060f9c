//! Instance explanations and their post-processing for display.
//!
//! The headline heatmap comes from M1, article heatmaps from M4, article
//! attribution and top sentences from M2, attribute importance from M3.

use serde::{Deserialize, Serialize};

use crate::encode::EncodedStory;
use crate::ensemble::{Ensemble, EnsemblePrediction};
use crate::ModelError;

pub const DEFAULT_HEATMAP_EPSILON: f64 = 0.05;
pub const TOP_SENTENCES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HeatmapScope {
    Headline,
    Article { article_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapEntry {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordHeatmap {
    pub scope: HeatmapScope,
    pub entries: Vec<HeatmapEntry>,
    pub threshold_applied: f64,
}

impl KeywordHeatmap {
    /// Index of the highest-scoring token (earliest on ties).
    pub fn argmax(&self) -> Option<usize> {
        argmax(self.entries.iter().map(|e| e.score))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleScore {
    pub article_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleAttribution {
    /// True when the story has no articles; `scores` is then empty.
    pub empty: bool,
    pub scores: Vec<ArticleScore>,
}

impl ArticleAttribution {
    pub fn top(&self) -> Option<&str> {
        argmax(self.scores.iter().map(|s| s.score)).map(|i| self.scores[i].article_id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeImportance {
    pub claim: f64,
    pub text: f64,
    pub source: f64,
}

impl AttributeImportance {
    /// Normalizes raw `[claim, text, source]` magnitudes; all-zero input gives
    /// the uniform split.
    pub fn from_raw(raw: [f64; 3]) -> Self {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            let third = 1.0 / 3.0;
            return Self {
                claim: third,
                text: third,
                source: third,
            };
        }
        Self {
            claim: raw[0] / total,
            text: raw[1] / total,
            source: raw[2] / total,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.claim, self.text, self.source]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleImportance {
    pub article_id: String,
    pub importance: AttributeImportance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSentence {
    pub sentence_index: usize,
    pub sentence_text: String,
    pub attention_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleTopSentences {
    pub article_id: String,
    pub sentences: Vec<RankedSentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationBundle {
    pub story_id: String,
    pub prediction: EnsemblePrediction,
    pub headline_heatmap: KeywordHeatmap,
    pub article_heatmaps: Vec<KeywordHeatmap>,
    pub article_attribution: ArticleAttribution,
    pub attribute_importance: Vec<ArticleImportance>,
    pub top_sentences: Vec<ArticleTopSentences>,
}

impl ExplanationBundle {
    pub fn article_ids(&self) -> Vec<&str> {
        self.article_attribution.scores.iter().map(|s| s.article_id.as_str()).collect()
    }
}

fn argmax<I: Iterator<Item = f64>>(xs: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in xs.enumerate() {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((i, x));
        }
    }
    best.map(|(i, _)| i)
}

/// Rescales to max 1 and zeroes entries below `epsilon` times the max.
pub fn rescale_heatmap(raw: &[f64], epsilon: f64) -> Vec<f64> {
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![0.0; raw.len()];
    }
    raw.iter()
        .map(|&x| if x < epsilon * max { 0.0 } else { x / max })
        .collect()
}

/// Nonnegative scores rescaled to sum to 1; uniform if they sum to zero.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if raw.is_empty() {
        return Vec::new();
    }
    if !(total > 0.0) {
        return vec![1.0 / raw.len() as f64; raw.len()];
    }
    raw.iter().map(|x| x / total).collect()
}

/// Indices of the `k` largest scores, descending, ties to the earlier index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn heatmap(scope: HeatmapScope, tokens: &[String], raw: &[f64], epsilon: f64) -> KeywordHeatmap {
    let scores = rescale_heatmap(raw, epsilon);
    KeywordHeatmap {
        scope,
        entries: tokens
            .iter()
            .zip(scores)
            .map(|(t, score)| HeatmapEntry { token: t.clone(), score })
            .collect(),
        threshold_applied: epsilon,
    }
}

pub fn headline_heatmap(story: &EncodedStory, attention: &[f64], epsilon: f64) -> Result<KeywordHeatmap, ModelError> {
    if story.headline_tokens.is_empty() {
        return Err(ModelError::EmptyHeadline(story.story_id.clone()));
    }
    Ok(heatmap(HeatmapScope::Headline, &story.headline_tokens, attention, epsilon))
}

pub fn article_attribution(story: &EncodedStory, attention: &[f64]) -> ArticleAttribution {
    ArticleAttribution {
        empty: story.articles.is_empty(),
        scores: story
            .articles
            .iter()
            .zip(normalize(attention))
            .map(|(a, score)| ArticleScore {
                article_id: a.article_id.clone(),
                score,
            })
            .collect(),
    }
}

pub fn top_sentences(story: &EncodedStory, sentence_attention: &[Vec<f64>]) -> Vec<ArticleTopSentences> {
    story
        .articles
        .iter()
        .zip(sentence_attention)
        .map(|(a, att)| ArticleTopSentences {
            article_id: a.article_id.clone(),
            sentences: top_k(att, TOP_SENTENCES)
                .into_iter()
                .map(|i| RankedSentence {
                    sentence_index: i,
                    sentence_text: a.sentence_texts[i].clone(),
                    attention_score: att[i],
                })
                .collect(),
        })
        .collect()
}

pub fn attribute_importance(story: &EncodedStory, raw: &[[f64; 3]]) -> Vec<ArticleImportance> {
    story
        .articles
        .iter()
        .zip(raw)
        .map(|(a, r)| ArticleImportance {
            article_id: a.article_id.clone(),
            importance: AttributeImportance::from_raw(*r),
        })
        .collect()
}

/// Builds one bundle per story, batching inference per model.
pub fn build_bundles(models: &Ensemble, stories: &[EncodedStory], epsilon: f64) -> Result<Vec<ExplanationBundle>, ModelError> {
    let m1 = models.m1.explain(stories);
    let m2 = models.m2.explain(stories);
    let m4 = models.m4.explain(stories);
    let m3: Vec<f64> = stories.iter().map(|s| models.m3.student_score(s)).collect();
    let mut out = Vec::with_capacity(stories.len());
    for (i, story) in stories.iter().enumerate() {
        let article_heatmaps = story
            .articles
            .iter()
            .zip(&m4[i].token_attention)
            .map(|(a, att)| {
                heatmap(
                    HeatmapScope::Article {
                        article_id: a.article_id.clone(),
                    },
                    &a.token_text,
                    att,
                    epsilon,
                )
            })
            .collect();
        out.push(ExplanationBundle {
            story_id: story.story_id.clone(),
            prediction: EnsemblePrediction::from_members([m1[i].score, m2[i].score, m3[i], m4[i].score]),
            headline_heatmap: headline_heatmap(story, &m1[i].attention, epsilon)?,
            article_heatmaps,
            article_attribution: article_attribution(story, &m2[i].article_attention),
            attribute_importance: attribute_importance(story, &models.m3.occlusion(story)),
            top_sentences: top_sentences(story, &m2[i].sentence_attention),
        });
    }
    Ok(out)
}

pub fn build_bundle(models: &Ensemble, story: &EncodedStory, epsilon: f64) -> Result<ExplanationBundle, ModelError> {
    Ok(build_bundles(models, std::slice::from_ref(story), epsilon)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn heatmap_rescaling() {
        assert!(close(&rescale_heatmap(&[0.5, 0.3, 0.2], 0.05), &[1.0, 0.6, 0.4]));
        assert!(close(&rescale_heatmap(&[0.98, 0.01, 0.01], 0.05), &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn attribution_normalization() {
        assert!(close(&normalize(&[2.0, 1.0, 1.0]), &[0.5, 0.25, 0.25]));
        assert!(close(&normalize(&[0.7]), &[1.0]));
    }

    #[test]
    fn importance_normalization() {
        let a = AttributeImportance::from_raw([0.3, 0.1, 0.1]);
        assert!(close(&a.as_array(), &[0.6, 0.2, 0.2]));
        let u = AttributeImportance::from_raw([0.0; 3]);
        assert!(close(&u.as_array(), &[1.0 / 3.0; 3]));
    }

    #[test]
    fn top_sentence_ties() {
        assert_eq!(top_k(&[0.4, 0.3, 0.1, 0.1, 0.1], 3), vec![0, 1, 2]);
        assert_eq!(top_k(&[0.2, 0.8], 3), vec![1, 0]);
    }
}
