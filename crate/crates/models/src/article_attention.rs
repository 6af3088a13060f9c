//! M4: BiLSTM over article tokens with headline-conditioned token attention.
//!
//! One BiLSTM encodes both headlines and article bodies. Each
//! article is pooled by attention whose query is the mean headline state;
//! article contexts are averaged per story and concatenated with the headline
//! before the output layer. A story without articles gets a zero context.

use std::rc::Rc;

use newsxai_core::rng::{self, Rng};
use newsxai_core::textprep::{EmbeddingTable, PAD_ID};

use crate::autodiff::{ParamId, ParamStore, Segments, Tape, Var};
use crate::encode::{check_two_classes, EncodedStory, TextEncoder};
use crate::layers::{dropout, AttentionScorer, BiLstm, Linear};
use crate::train::{fit, ModelConfig, Trainable, TrainingHistory};
use crate::{logits_to_scores, Detector, ModelError, ModelKind, INFERENCE_BATCH};

#[derive(Debug, Clone)]
pub struct ArticleAttentionModel {
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub history: TrainingHistory,
    params: ParamStore,
    embedding: ParamId,
    encoder: BiLstm,
    attention: AttentionScorer,
    classifier: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArticleAttentionOutput {
    pub score: f64,
    /// Per article, one weight per body token.
    pub token_attention: Vec<Vec<f64>>,
}

struct Forward {
    logits: Var,
    weights: Var,
    token_segments: Rc<Segments>,
}

impl ArticleAttentionModel {
    pub fn new(config: ModelConfig, encoder: &TextEncoder, init: Option<&EmbeddingTable>) -> Self {
        let mut r = rng::seeded(config.seed, "m4/init");
        let mut params = ParamStore::default();
        let table = init
            .cloned()
            .unwrap_or_else(|| EmbeddingTable::random(&encoder.vocab, config.embedding_dim, config.seed));
        let dim = table.dimension;
        let embedding = params.add("embedding", table.vectors);
        params.pin_zero_row(embedding, PAD_ID as usize);
        let bilstm = BiLstm::new(&mut params, &mut r, "text", dim, config.hidden_size);
        let d = bilstm.output_dim();
        let attention = AttentionScorer::new(&mut params, &mut r, "attention", d, Some(d), config.attention_size);
        let classifier = Linear::new(&mut params, &mut r, "classifier", 2 * d, 1);
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
        model.history = fit(&mut model, train, &config, "m4");
        Ok(model)
    }

    fn forward(&self, t: &mut Tape, batch: &[&EncodedStory], rng: Option<&mut Rng>) -> Forward {
        let emb = t.param(self.embedding);
        let articles: Vec<_> = batch.iter().flat_map(|s| s.articles.iter()).collect();
        let headlines: Vec<&[u32]> = batch.iter().map(|s| s.headline.as_slice()).collect();
        let bodies: Vec<&[u32]> = articles.iter().map(|a| a.tokens.as_slice()).collect();
        let head = self.encoder.encode(t, emb, &headlines);
        let body = self.encoder.encode(t, emb, &bodies);
        let token_segments = body.segments;
        let article_segments = Rc::new(Segments::from_lengths(batch.iter().map(|s| s.articles.len())));
        let token_states = body.states;
        let headline = t.seg_mean(head.states, &head.segments);

        let article_owner = article_segments.owners();
        let query_index: Vec<usize> = token_segments.owners().into_iter().map(|a| article_owner[a]).collect();
        let query = t.select_rows(headline, query_index);
        let scores = self.attention.scores(t, token_states, Some(query));
        let weights = t.seg_softmax(scores, &token_segments);
        let contexts = t.seg_weighted_sum(token_states, weights, &token_segments);
        let evidence = t.seg_mean(contexts, &article_segments);

        let joint = t.hcat(&[headline, evidence]);
        let joint = dropout(t, joint, self.config.dropout, rng);
        let logits = self.classifier.forward(t, joint);
        Forward {
            logits,
            weights,
            token_segments,
        }
    }

    pub fn explain(&self, stories: &[EncodedStory]) -> Vec<ArticleAttentionOutput> {
        let mut out = Vec::with_capacity(stories.len());
        for chunk in stories.chunks(INFERENCE_BATCH) {
            let batch: Vec<&EncodedStory> = chunk.iter().collect();
            let mut t = Tape::new(&self.params);
            let f = self.forward(&mut t, &batch, None);
            let scores = logits_to_scores(t.value(f.logits));
            let w = t.value(f.weights);
            let mut article_index = 0;
            for (story, score) in batch.iter().zip(scores) {
                let token_attention = (0..story.articles.len())
                    .map(|k| f.token_segments.range(article_index + k).map(|i| w[[i, 0]]).collect())
                    .collect();
                article_index += story.articles.len();
                out.push(ArticleAttentionOutput { score, token_attention });
            }
        }
        out
    }
}

impl Trainable for ArticleAttentionModel {
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

impl Detector for ArticleAttentionModel {
    fn kind(&self) -> ModelKind {
        ModelKind::M4
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn predict_scores(&self, stories: &[EncodedStory]) -> Vec<f64> {
        self.explain(stories).into_iter().map(|o| o.score).collect()
    }
}
