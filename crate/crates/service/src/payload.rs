//! Condition-filtered payloads. Anything a condition does not reveal is left
//! out of the serialized record entirely rather than sent as null.

use serde::{Deserialize, Serialize};

use newsxai_core::corpus::{Label, NewsStory};
use newsxai_models::explain::{ArticleAttribution, ArticleImportance, ArticleTopSentences, ExplanationBundle, KeywordHeatmap};
use newsxai_study::session::REQUIRED_SHARES;
use newsxai_study::{ExplanationKind, Phase, QueueItem, Session, StudyCondition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleView {
    pub article_id: String,
    pub title: String,
    pub source: String,
    pub body: String,
}

/// Story text without its veracity label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryContent {
    pub story_id: String,
    pub headline: String,
    pub articles: Vec<ArticleView>,
}

impl StoryContent {
    pub fn from_story(s: &NewsStory) -> Self {
        Self {
            story_id: s.story_id.clone(),
            headline: s.headline.clone(),
            articles: s
                .articles
                .iter()
                .map(|a| ArticleView {
                    article_id: a.article_id.clone(),
                    title: a.title.clone(),
                    source: a.source.clone(),
                    body: a.body.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordHeatmaps {
    pub headline: KeywordHeatmap,
    pub articles: Vec<KeywordHeatmap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistantView {
    pub prediction: Label,
    pub confidence: f64,
    pub headline_confidence: f64,
    pub articles_confidence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyword_heatmaps: Option<KeywordHeatmaps>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub article_attribution: Option<ArticleAttribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute_importance: Option<Vec<ArticleImportance>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_sentences: Option<Vec<ArticleTopSentences>>,
}

impl AssistantView {
    /// What `condition` reveals for `item`; `None` for baseline.
    pub fn build(condition: StudyCondition, item: &QueueItem, bundle: &ExplanationBundle) -> Option<Self> {
        if !condition.shows_prediction() {
            return None;
        }
        let set = condition.explanation_set();
        let has = |k| set.contains(&k);
        Some(Self {
            prediction: item.displayed_prediction,
            confidence: item.displayed_confidence,
            headline_confidence: bundle.prediction.headline_confidence,
            articles_confidence: bundle.prediction.articles_confidence,
            keyword_heatmaps: has(ExplanationKind::KeywordHeatmaps).then(|| KeywordHeatmaps {
                headline: bundle.headline_heatmap.clone(),
                articles: bundle.article_heatmaps.clone(),
            }),
            article_attribution: has(ExplanationKind::ArticleAttribution).then(|| bundle.article_attribution.clone()),
            attribute_importance: has(ExplanationKind::AttributeImportance).then(|| bundle.attribute_importance.clone()),
            top_sentences: has(ExplanationKind::TopSentences).then(|| bundle.top_sentences.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryView {
    pub session_id: String,
    pub condition: StudyCondition,
    pub phase: Phase,
    /// 1-based queue position.
    pub position: usize,
    pub share_count: usize,
    pub required_shares: usize,
    pub story: StoryContent,
    /// A prediction popup must be answered before the assistant is shown.
    pub popup: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assistant: Option<AssistantView>,
}

impl StoryView {
    pub fn build(session: &Session, item: &QueueItem, story: StoryContent, bundle: &ExplanationBundle) -> Self {
        let popup = session.pending_popup().is_some();
        Self {
            session_id: session.session_id.clone(),
            condition: session.condition,
            phase: session.phase,
            position: item.position,
            share_count: session.share_count(),
            required_shares: REQUIRED_SHARES,
            story,
            popup,
            assistant: if popup {
                None
            } else {
                AssistantView::build(session.condition, item, bundle)
            },
        }
    }
}

/// Summary of a session's progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub study_id: String,
    pub condition: StudyCondition,
    pub phase: Phase,
    pub cursor: usize,
    pub share_count: usize,
    pub reported: usize,
    pub skipped: usize,
    pub popups_answered: usize,
    pub events: usize,
}

impl SessionState {
    pub fn of(study_id: &str, s: &Session) -> Self {
        Self {
            session_id: s.session_id.clone(),
            study_id: study_id.to_string(),
            condition: s.condition,
            phase: s.phase,
            cursor: s.cursor,
            share_count: s.share_count(),
            reported: s.reported.len(),
            skipped: s.skipped.len(),
            popups_answered: s.popup_answers.len(),
            events: s.events.len(),
        }
    }
}
