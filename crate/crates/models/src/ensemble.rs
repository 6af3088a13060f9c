//! Averaged four-member ensemble.

use serde::{Deserialize, Serialize};

use newsxai_core::corpus::{Label, NewsStory};
use newsxai_core::textprep::EmbeddingTable;

use crate::article_attention::ArticleAttentionModel;
use crate::encode::{EncodedStory, TextEncoder};
use crate::gbdt::GbdtConfig;
use crate::headline::HeadlineModel;
use crate::hierarchical::HierarchicalModel;
use crate::mimic::MimicModel;
use crate::train::ModelConfig;
use crate::{Detector, ModelError, ModelKind};

/// Confidence in whichever label the score implies.
pub fn confidence(score: f64) -> f64 {
    score.max(1.0 - score)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub label: Label,
    pub headline_confidence: f64,
    pub articles_confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePrediction {
    /// Scores of M1, M2, M3, M4 in that order.
    pub member_scores: [f64; 4],
    pub score: f64,
    pub label: Label,
    pub headline_confidence: f64,
    pub articles_confidence: f64,
}

impl EnsemblePrediction {
    pub fn from_members(member_scores: [f64; 4]) -> Self {
        let score = member_scores.iter().sum::<f64>() / 4.0;
        Self {
            member_scores,
            score,
            label: Label::from_score(score),
            headline_confidence: confidence(member_scores[0]),
            articles_confidence: 0.5 * (confidence(member_scores[1]) + confidence(member_scores[3])),
        }
    }

    pub fn prediction(&self) -> Prediction {
        Prediction {
            score: self.score,
            label: self.label,
            headline_confidence: self.headline_confidence,
            articles_confidence: self.articles_confidence,
        }
    }

    pub fn member(&self, kind: ModelKind) -> f64 {
        self.member_scores[kind as usize]
    }
}

/// Per-model training settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub m1: ModelConfig,
    pub m2: ModelConfig,
    pub m3: ModelConfig,
    pub m3_student: GbdtConfig,
    pub m4: ModelConfig,
}

impl EnsembleConfig {
    /// The same settings for every neural model.
    pub fn uniform(config: ModelConfig) -> Self {
        Self {
            m1: config.clone(),
            m2: config.clone(),
            m3: config.clone(),
            m3_student: GbdtConfig::default(),
            m4: config,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        for c in [&mut self.m1, &mut self.m2, &mut self.m3, &mut self.m4] {
            c.seed = seed;
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub encoder: TextEncoder,
    pub m1: HeadlineModel,
    pub m2: HierarchicalModel,
    pub m3: MimicModel,
    pub m4: ArticleAttentionModel,
}

impl Ensemble {
    /// Assembles trained members, which must share the encoder's vocabulary.
    pub fn new(
        encoder: TextEncoder,
        m1: HeadlineModel,
        m2: HierarchicalModel,
        m3: MimicModel,
        m4: ArticleAttentionModel,
    ) -> Result<Self, ModelError> {
        let expected = encoder.vocab_hash();
        for h in [m1.vocab_hash(), m2.vocab_hash(), m3.vocab_hash(), m4.vocab_hash()] {
            if h != expected {
                return Err(ModelError::VocabularyMismatch(expected, h.to_string()));
            }
        }
        Ok(Self { encoder, m1, m2, m3, m4 })
    }

    /// Trains all four members on the encoded training split, one thread each.
    pub fn train(
        encoder: TextEncoder,
        train: &[EncodedStory],
        config: &EnsembleConfig,
        init: Option<&EmbeddingTable>,
    ) -> Result<Self, ModelError> {
        let (m1, m2, m3, m4) = std::thread::scope(|s| {
            let enc = &encoder;
            let h1 = s.spawn(|| HeadlineModel::train(train, config.m1.clone(), enc, init));
            let h2 = s.spawn(|| HierarchicalModel::train(train, config.m2.clone(), enc, init));
            let h3 = s.spawn(|| MimicModel::train(train, config.m3.clone(), config.m3_student.clone(), enc, init));
            let h4 = s.spawn(|| ArticleAttentionModel::train(train, config.m4.clone(), enc, init));
            (
                h1.join().expect("m1 training panicked"),
                h2.join().expect("m2 training panicked"),
                h3.join().expect("m3 training panicked"),
                h4.join().expect("m4 training panicked"),
            )
        });
        Self::new(encoder, m1?, m2?, m3?, m4?)
    }

    pub fn members(&self) -> [&dyn Detector; 4] {
        [&self.m1, &self.m2, &self.m3, &self.m4]
    }

    pub fn member(&self, kind: ModelKind) -> &dyn Detector {
        self.members()[kind as usize]
    }

    pub fn encode(&self, stories: &[&NewsStory]) -> Vec<EncodedStory> {
        self.encoder.encode_all(stories.iter().copied())
    }

    pub fn predict(&self, stories: &[EncodedStory]) -> Vec<EnsemblePrediction> {
        let per_member: Vec<Vec<f64>> = self.members().iter().map(|m| m.predict_scores(stories)).collect();
        (0..stories.len())
            .map(|i| EnsemblePrediction::from_members([0, 1, 2, 3].map(|k| per_member[k][i])))
            .collect()
    }

    pub fn vocab_hash(&self) -> String {
        self.encoder.vocab_hash()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_threshold() {
        let p = EnsemblePrediction::from_members([0.6, 0.8, 0.7, 0.9]);
        assert!((p.score - 0.75).abs() < 1e-12);
        assert_eq!(p.label, Label::Fake);
        let p = EnsemblePrediction::from_members([0.5; 4]);
        assert_eq!(p.score, 0.5);
        assert_eq!(p.label, Label::Fake);
    }

    #[test]
    fn confidences() {
        let p = EnsemblePrediction::from_members([0.2, 0.9, 0.5, 0.3]);
        assert!((p.headline_confidence - 0.8).abs() < 1e-12);
        assert!((p.articles_confidence - 0.8).abs() < 1e-12);
    }
}
