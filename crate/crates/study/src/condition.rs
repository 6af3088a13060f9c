//! The five interface conditions and what each one reveals.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StudyCondition {
    Baseline,
    Ai,
    XaiAttention,
    XaiAttribution,
    XaiAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationKind {
    KeywordHeatmaps,
    ArticleAttribution,
    AttributeImportance,
    TopSentences,
}

impl ExplanationKind {
    pub fn name(self) -> &'static str {
        match self {
            ExplanationKind::KeywordHeatmaps => "keyword_heatmaps",
            ExplanationKind::ArticleAttribution => "article_attribution",
            ExplanationKind::AttributeImportance => "attribute_importance",
            ExplanationKind::TopSentences => "top_sentences",
        }
    }
}

impl StudyCondition {
    pub const ALL: [StudyCondition; 5] = [
        StudyCondition::Baseline,
        StudyCondition::Ai,
        StudyCondition::XaiAttention,
        StudyCondition::XaiAttribution,
        StudyCondition::XaiAll,
    ];

    /// Whether the assistant panel (prediction and confidence) exists at all.
    pub fn shows_prediction(self) -> bool {
        self != StudyCondition::Baseline
    }

    pub fn explanation_set(self) -> BTreeSet<ExplanationKind> {
        use ExplanationKind::*;
        let attention = [KeywordHeatmaps];
        let attribution = [ArticleAttribution, AttributeImportance, TopSentences];
        match self {
            StudyCondition::Baseline | StudyCondition::Ai => BTreeSet::new(),
            StudyCondition::XaiAttention => attention.into_iter().collect(),
            StudyCondition::XaiAttribution => attribution.into_iter().collect(),
            StudyCondition::XaiAll => attention.into_iter().chain(attribution).collect(),
        }
    }

    /// Lowercase, dash-separated name used on the command line.
    pub fn slug(self) -> &'static str {
        match self {
            StudyCondition::Baseline => "baseline",
            StudyCondition::Ai => "ai",
            StudyCondition::XaiAttention => "xai-attention",
            StudyCondition::XaiAttribution => "xai-attribution",
            StudyCondition::XaiAll => "xai-all",
        }
    }
}

impl fmt::Display for StudyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyCondition::Baseline => "BASELINE",
            StudyCondition::Ai => "AI",
            StudyCondition::XaiAttention => "XAI_ATTENTION",
            StudyCondition::XaiAttribution => "XAI_ATTRIBUTION",
            StudyCondition::XaiAll => "XAI_ALL",
        })
    }
}

impl FromStr for StudyCondition {
    type Err = String;

    /// Accepts both `XAI_ALL` and `xai-all` spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        StudyCondition::ALL
            .into_iter()
            .find(|c| c.slug() == norm)
            .ok_or_else(|| format!("unknown condition {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExplanationKind::*;

    #[test]
    fn explanation_sets() {
        assert!(StudyCondition::Baseline.explanation_set().is_empty());
        assert!(!StudyCondition::Baseline.shows_prediction());
        assert!(StudyCondition::Ai.explanation_set().is_empty());
        assert!(StudyCondition::Ai.shows_prediction());
        assert_eq!(StudyCondition::XaiAttention.explanation_set(), [KeywordHeatmaps].into());
        assert_eq!(
            StudyCondition::XaiAttribution.explanation_set(),
            [ArticleAttribution, AttributeImportance, TopSentences].into()
        );
        let union: BTreeSet<_> = StudyCondition::XaiAttention
            .explanation_set()
            .union(&StudyCondition::XaiAttribution.explanation_set())
            .copied()
            .collect();
        assert_eq!(StudyCondition::XaiAll.explanation_set(), union);
    }

    #[test]
    fn parsing() {
        for c in StudyCondition::ALL {
            assert_eq!(c.slug().parse::<StudyCondition>().unwrap(), c);
            assert_eq!(c.to_string().parse::<StudyCondition>().unwrap(), c);
        }
        assert!("xai".parse::<StudyCondition>().is_err());
    }
}
