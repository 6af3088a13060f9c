//! The four interpretable fake-news detectors, their averaged ensemble, and
//! the extraction of instance explanations from them.
//!
//! * [`headline::HeadlineModel`] (M1): BiLSTM over the headline with
//!   self-attention pooling.
//! * [`hierarchical::HierarchicalModel`] (M2): sentence- and article-level
//!   attention over related articles, combined with a BiLSTM headline encoder.
//! * [`mimic::MimicModel`] (M3): a BiLSTM teacher over claim, article text and
//!   source, distilled into a 60-tree gradient-boosted student.
//! * [`article_attention::ArticleAttentionModel`] (M4): BiLSTM over article
//!   tokens with headline-conditioned token attention.

pub mod article_attention;
pub mod artifact;
pub mod autodiff;
pub mod encode;
pub mod ensemble;
pub mod evaluate;
pub mod explain;
pub mod gbdt;
pub mod headline;
pub mod hierarchical;
pub mod layers;
pub mod mimic;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use newsxai_core::corpus::Label;

pub use encode::{EncodedArticle, EncodedStory, TextEncoder};
pub use ensemble::{Ensemble, EnsemblePrediction, Prediction};
pub use train::ModelConfig;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training split is empty")]
    EmptyTraining,
    #[error("training data contains only {0} stories; both labels are required")]
    SingleClass(Label),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("story {0} has an empty headline")]
    EmptyHeadline(String),
    #[error("cannot evaluate on an empty split")]
    EmptyEvaluation,
    #[error("models were trained on different vocabularies ({0} vs {1})")]
    VocabularyMismatch(String, String),
    #[error("artifact error at {path}: {reason}")]
    Artifact { path: String, reason: String },
    #[error(transparent)]
    Text(#[from] newsxai_core::textprep::TextError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    M1,
    M2,
    M3,
    M4,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::M1, ModelKind::M2, ModelKind::M3, ModelKind::M4];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
            ModelKind::M3 => "m3",
            ModelKind::M4 => "m4",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m1" => Ok(ModelKind::M1),
            "m2" => Ok(ModelKind::M2),
            "m3" => Ok(ModelKind::M3),
            "m4" => Ok(ModelKind::M4),
            other => Err(format!("unknown model {other:?}")),
        }
    }
}

/// A trained detector producing probability-of-FAKE scores per story.
pub trait Detector: Send + Sync {
    fn kind(&self) -> ModelKind;
    fn vocab_hash(&self) -> &str;
    fn predict_scores(&self, stories: &[EncodedStory]) -> Vec<f64>;
}

pub(crate) const INFERENCE_BATCH: usize = 64;

pub(crate) fn logits_to_scores(m: &autodiff::Matrix) -> Vec<f64> {
    m.column(0).iter().map(|&z| autodiff::sigmoid_scalar(z)).collect()
}
