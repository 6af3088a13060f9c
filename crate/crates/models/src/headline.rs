//! M1: headline-only BiLSTM with self-attention pooling.
//!
//! Each token is represented by its BiLSTM state concatenated with its own
//! embedding, so attention can single out the word that carries the signal
//! rather than a neighbouring state that has already absorbed it.

use std::rc::Rc;

use newsxai_core::rng::{self, Rng};
use newsxai_core::textprep::{EmbeddingTable, PAD_ID};

use crate::autodiff::{ParamId, ParamStore, Segments, Tape, Var};
use crate::encode::{check_two_classes, EncodedStory, TextEncoder};
use crate::layers::{dropout, AttentionScorer, BiLstm, Linear};
use crate::train::{fit, ModelConfig, Trainable, TrainingHistory};
use crate::{logits_to_scores, Detector, ModelError, ModelKind, INFERENCE_BATCH};

#[derive(Debug, Clone)]
pub struct HeadlineModel {
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub history: TrainingHistory,
    params: ParamStore,
    embedding: ParamId,
    encoder: BiLstm,
    attention: AttentionScorer,
    classifier: Linear,
}

/// Score and per-token attention for one headline.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadlineOutput {
    pub score: f64,
    pub attention: Vec<f64>,
}

struct Forward {
    logits: Var,
    attention: Var,
    segments: Rc<Segments>,
}

impl HeadlineModel {
    /// Untrained model with the layout fixed by `config` and the vocabulary.
    pub fn new(config: ModelConfig, encoder: &TextEncoder, init: Option<&EmbeddingTable>) -> Self {
        let mut r = rng::seeded(config.seed, "m1/init");
        let mut params = ParamStore::default();
        let table = init
            .cloned()
            .unwrap_or_else(|| EmbeddingTable::random(&encoder.vocab, config.embedding_dim, config.seed));
        let embedding = params.add("embedding", table.vectors);
        params.pin_zero_row(embedding, PAD_ID as usize);
        let dim = table.dimension;
        let bilstm = BiLstm::new(&mut params, &mut r, "headline", dim, config.hidden_size);
        let width = bilstm.output_dim() + dim;
        let attention = AttentionScorer::new(&mut params, &mut r, "attention", width, None, config.attention_size);
        let classifier = Linear::new(&mut params, &mut r, "classifier", width, 1);
        Self {
            config: ModelConfig {
                embedding_dim: dim,
                ..config
            },
            vocab_hash: encoder.vocab_hash(),
            history: TrainingHistory::default(),
            params,
            embedding,
            encoder: bilstm,
            attention,
            classifier,
        }
    }

    pub fn train(
        train: &[EncodedStory],
        config: ModelConfig,
        encoder: &TextEncoder,
        init: Option<&EmbeddingTable>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        check_two_classes(train)?;
        let mut model = Self::new(config.clone(), encoder, init);
        model.history = fit(&mut model, train, &config, "m1");
        Ok(model)
    }

    fn forward(&self, t: &mut Tape, batch: &[&EncodedStory], rng: Option<&mut Rng>) -> Forward {
        let emb = t.param(self.embedding);
        let seqs: Vec<&[u32]> = batch.iter().map(|s| s.headline.as_slice()).collect();
        let out = self.encoder.encode(t, emb, &seqs);
        let words = t.select_rows(emb, seqs.iter().flat_map(|s| s.iter().map(|&i| i as usize)).collect());
        let states = t.hcat(&[out.states, words]);
        let scores = self.attention.scores(t, states, None);
        let attention = t.seg_softmax(scores, &out.segments);
        let pooled = t.seg_weighted_sum(states, attention, &out.segments);
        let pooled = dropout(t, pooled, self.config.dropout, rng);
        let logits = self.classifier.forward(t, pooled);
        Forward {
            logits,
            attention,
            segments: out.segments,
        }
    }

    /// Scores and headline-token attention, in input order.
    pub fn explain(&self, stories: &[EncodedStory]) -> Vec<HeadlineOutput> {
        let mut out = Vec::with_capacity(stories.len());
        for chunk in stories.chunks(INFERENCE_BATCH) {
            let batch: Vec<&EncodedStory> = chunk.iter().collect();
            let mut t = Tape::new(&self.params);
            let f = self.forward(&mut t, &batch, None);
            let scores = logits_to_scores(t.value(f.logits));
            let att = t.value(f.attention);
            for (g, score) in scores.into_iter().enumerate() {
                out.push(HeadlineOutput {
                    score,
                    attention: f.segments.range(g).map(|i| att[[i, 0]]).collect(),
                });
            }
        }
        out
    }
}

impl Trainable for HeadlineModel {
    type Item = EncodedStory;

    fn params(&self) -> &ParamStore {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn batch_loss(&self, t: &mut Tape, batch: &[&EncodedStory], rng: Option<&mut Rng>) -> Var {
        let f = self.forward(t, batch, rng);
        t.bce_with_logits(f.logits, batch.iter().map(|s| s.label.target()).collect())
    }
}

impl Detector for HeadlineModel {
    fn kind(&self) -> ModelKind {
        ModelKind::M1
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn predict_scores(&self, stories: &[EncodedStory]) -> Vec<f64> {
        self.explain(stories).into_iter().map(|o| o.score).collect()
    }
}
