//! M2: hierarchical attention over related articles.
//!
//! Sentences are averaged word embeddings. Sentence attention pools each
//! article; article attention, conditioned on the headline, pools the story.
//! The pooled evidence is concatenated with a BiLSTM headline encoding and
//! fed to a linear classifier. Stories without articles contribute a zero
//! evidence vector, which leaves the headline path in charge.

use std::rc::Rc;

use newsxai_core::rng::{self, Rng};
use newsxai_core::textprep::{EmbeddingTable, PAD_ID};

use crate::autodiff::{ParamId, ParamStore, Segments, Tape, Var};
use crate::encode::{check_two_classes, EncodedStory, TextEncoder};
use crate::layers::{dropout, row_dropout, AttentionScorer, BiLstm, Linear};
use crate::train::{fit, ModelConfig, Trainable, TrainingHistory};
use crate::{logits_to_scores, Detector, ModelError, ModelKind, INFERENCE_BATCH};

/// Share of training stories whose headline encoding is zeroed, so the
/// evidence path learns to classify on its own.
pub const HEADLINE_DROPOUT: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct HierarchicalModel {
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub history: TrainingHistory,
    params: ParamStore,
    embedding: ParamId,
    headline: BiLstm,
    sentence_proj: Linear,
    sentence_attention: AttentionScorer,
    article_attention: AttentionScorer,
    classifier: Linear,
}

/// Score plus raw attention at both levels for one story.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalOutput {
    pub score: f64,
    /// One weight per article, in story order.
    pub article_attention: Vec<f64>,
    /// Per article, one weight per retained sentence.
    pub sentence_attention: Vec<Vec<f64>>,
}

struct Forward {
    logits: Var,
    sentence_weights: Var,
    sentence_segments: Rc<Segments>,
    article_weights: Var,
    article_segments: Rc<Segments>,
}

impl HierarchicalModel {
    pub fn new(config: ModelConfig, encoder: &TextEncoder, init: Option<&EmbeddingTable>) -> Self {
        let mut r = rng::seeded(config.seed, "m2/init");
        let mut params = ParamStore::default();
        let table = init
            .cloned()
            .unwrap_or_else(|| EmbeddingTable::random(&encoder.vocab, config.embedding_dim, config.seed));
        let dim = table.dimension;
        let embedding = params.add("embedding", table.vectors);
        params.pin_zero_row(embedding, PAD_ID as usize);
        let h = config.hidden_size;
        let headline = BiLstm::new(&mut params, &mut r, "headline", dim, h);
        let sentence_proj = Linear::new(&mut params, &mut r, "sentence", dim, 2 * h);
        let sentence_attention = AttentionScorer::new(&mut params, &mut r, "sentence_attention", 2 * h, None, config.attention_size);
        let article_attention = AttentionScorer::new(
            &mut params,
            &mut r,
            "article_attention",
            2 * h,
            Some(headline.output_dim()),
            config.attention_size,
        );
        let classifier = Linear::new(&mut params, &mut r, "classifier", headline.output_dim() + 2 * h, 1);
        Self {
            config: ModelConfig {
                embedding_dim: dim,
                ..config
            },
            vocab_hash: encoder.vocab_hash(),
            history: TrainingHistory::default(),
            params,
            embedding,
            headline,
            sentence_proj,
            sentence_attention,
            article_attention,
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
        model.history = fit(&mut model, train, &config, "m2");
        Ok(model)
    }

    fn forward(&self, t: &mut Tape, batch: &[&EncodedStory], mut rng: Option<&mut Rng>) -> Forward {
        let emb = t.param(self.embedding);

        let seqs: Vec<&[u32]> = batch.iter().map(|s| s.headline.as_slice()).collect();
        let out = self.headline.encode(t, emb, &seqs);
        let query = t.seg_mean(out.states, &out.segments);
        let headline = row_dropout(t, query, HEADLINE_DROPOUT, rng.as_deref_mut());

        let articles: Vec<_> = batch.iter().flat_map(|s| s.articles.iter()).collect();
        let sentences: Vec<&Vec<u32>> = articles.iter().flat_map(|a| a.sentences.iter()).collect();
        let token_segments = Rc::new(Segments::from_lengths(sentences.iter().map(|s| s.len())));
        let sentence_segments = Rc::new(Segments::from_lengths(articles.iter().map(|a| a.sentences.len())));
        let article_segments = Rc::new(Segments::from_lengths(batch.iter().map(|s| s.articles.len())));

        let ids: Vec<usize> = sentences.iter().flat_map(|s| s.iter().map(|&i| i as usize)).collect();
        let words = t.select_rows(emb, ids);
        let sent = t.seg_mean(words, &token_segments);
        let sent = self.sentence_proj.forward(t, sent);
        let sent = t.tanh(sent);
        let sent_scores = self.sentence_attention.scores(t, sent, None);
        let sentence_weights = t.seg_softmax(sent_scores, &sentence_segments);
        let article_vecs = t.seg_weighted_sum(sent, sentence_weights, &sentence_segments);

        let query = t.select_rows(query, article_segments.owners());
        let art_scores = self.article_attention.scores(t, article_vecs, Some(query));
        let article_weights = t.seg_softmax(art_scores, &article_segments);
        let evidence = t.seg_weighted_sum(article_vecs, article_weights, &article_segments);

        let joint = t.hcat(&[headline, evidence]);
        let joint = dropout(t, joint, self.config.dropout, rng.as_deref_mut());
        let logits = self.classifier.forward(t, joint);
        Forward {
            logits,
            sentence_weights,
            sentence_segments,
            article_weights,
            article_segments,
        }
    }

    /// Scores and attention at both levels, in input order.
    pub fn explain(&self, stories: &[EncodedStory]) -> Vec<HierarchicalOutput> {
        let mut out = Vec::with_capacity(stories.len());
        for chunk in stories.chunks(INFERENCE_BATCH) {
            let batch: Vec<&EncodedStory> = chunk.iter().collect();
            let mut t = Tape::new(&self.params);
            let f = self.forward(&mut t, &batch, None);
            let scores = logits_to_scores(t.value(f.logits));
            let aw = t.value(f.article_weights);
            let sw = t.value(f.sentence_weights);
            let mut article_index = 0;
            for (g, score) in scores.into_iter().enumerate() {
                let article_attention: Vec<f64> = f.article_segments.range(g).map(|i| aw[[i, 0]]).collect();
                let sentence_attention = (0..article_attention.len())
                    .map(|k| {
                        f.sentence_segments
                            .range(article_index + k)
                            .map(|i| sw[[i, 0]])
                            .collect()
                    })
                    .collect();
                article_index += article_attention.len();
                out.push(HierarchicalOutput {
                    score,
                    article_attention,
                    sentence_attention,
                });
            }
        }
        out
    }
}

impl Trainable for HierarchicalModel {
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

impl Detector for HierarchicalModel {
    fn kind(&self) -> ModelKind {
        ModelKind::M2
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn predict_scores(&self, stories: &[EncodedStory]) -> Vec<f64> {
        self.explain(stories).into_iter().map(|o| o.score).collect()
    }
}
