//! M3: mimic learning. A BiLSTM teacher reads the claim, one related
//! article and the article's source; a 60-tree boosted student regresses the
//! teacher's probability from three feature groups (claim, text, source).
//!
//! Both work on (story, article) instances carrying the story label. A story
//! without articles is a single instance with empty text and unknown source.
//! Story scores are the mean over instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use newsxai_core::rng::{self, Rng};
use newsxai_core::textprep::{EmbeddingTable, PAD_ID};

use crate::autodiff::{ParamId, ParamStore, Tape, Var};
use crate::encode::{check_two_classes, EncodedStory, SourceStats, TextEncoder};
use crate::gbdt::{Gbdt, GbdtConfig};
use crate::layers::{dropout, BiLstm, Linear};
use crate::train::{fit, ModelConfig, Trainable, TrainingHistory};
use crate::{logits_to_scores, Detector, ModelError, ModelKind, INFERENCE_BATCH};

pub const SOURCE_EMBEDDING_DIM: usize = 8;
pub const TOP_TOKENS: usize = 50;
const MIN_TOKEN_COUNT: usize = 5;
/// Size of the evenly spaced training sample used for occlusion.
pub const BACKGROUND_ROWS: usize = 100;

/// Feature groups of the student, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Claim,
    Text,
    Source,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [FeatureGroup::Claim, FeatureGroup::Text, FeatureGroup::Source];
}

/// One (story, article) pair as seen by the teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub headline: Vec<u32>,
    pub tokens: Vec<u32>,
    pub source_id: u32,
    pub target: f64,
}

pub fn instances(story: &EncodedStory) -> Vec<Instance> {
    if story.articles.is_empty() {
        return vec![Instance {
            headline: story.headline.clone(),
            tokens: Vec::new(),
            source_id: 0,
            target: story.label.target(),
        }];
    }
    story
        .articles
        .iter()
        .map(|a| Instance {
            headline: story.headline.clone(),
            tokens: a.tokens.clone(),
            source_id: a.source_id,
            target: story.label.target(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Teacher {
    pub config: ModelConfig,
    pub history: TrainingHistory,
    params: ParamStore,
    embedding: ParamId,
    source_embedding: ParamId,
    encoder: BiLstm,
    classifier: Linear,
}

impl Teacher {
    pub fn new(config: ModelConfig, encoder: &TextEncoder, init: Option<&EmbeddingTable>) -> Self {
        let mut r = rng::seeded(config.seed, "m3/teacher/init");
        let mut params = ParamStore::default();
        let table = init
            .cloned()
            .unwrap_or_else(|| EmbeddingTable::random(&encoder.vocab, config.embedding_dim, config.seed));
        let dim = table.dimension;
        let embedding = params.add("embedding", table.vectors);
        params.pin_zero_row(embedding, PAD_ID as usize);
        let src = ndarray::Array2::from_shape_fn((encoder.sources.vocabulary_size(), SOURCE_EMBEDDING_DIM), |_| {
            use rand::Rng as _;
            r.random_range(-0.1..0.1)
        });
        let source_embedding = params.add("source_embedding", src);
        let bilstm = BiLstm::new(&mut params, &mut r, "text", dim, config.hidden_size);
        let d = bilstm.output_dim();
        let classifier = Linear::new(&mut params, &mut r, "classifier", 2 * d + SOURCE_EMBEDDING_DIM, 1);
        Self {
            config: ModelConfig {
                embedding_dim: dim,
                ..config
            },
            history: TrainingHistory::default(),
            params,
            embedding,
            source_embedding,
            encoder: bilstm,
            classifier,
        }
    }

    fn logits(&self, t: &mut Tape, batch: &[&Instance], rng: Option<&mut Rng>) -> Var {
        let emb = t.param(self.embedding);
        let headlines: Vec<&[u32]> = batch.iter().map(|i| i.headline.as_slice()).collect();
        let bodies: Vec<&[u32]> = batch.iter().map(|i| i.tokens.as_slice()).collect();
        let head = self.encoder.encode(t, emb, &headlines);
        let body = self.encoder.encode(t, emb, &bodies);
        let headline = t.seg_mean(head.states, &head.segments);
        let text = t.seg_mean(body.states, &body.segments);
        let src = t.param(self.source_embedding);
        let src = t.select_rows(src, batch.iter().map(|i| i.source_id as usize).collect());
        let joint = t.hcat(&[headline, text, src]);
        let joint = dropout(t, joint, self.config.dropout, rng);
        self.classifier.forward(t, joint)
    }

    pub fn predict_instances(&self, items: &[Instance]) -> Vec<f64> {
        let mut out = Vec::with_capacity(items.len());
        for chunk in items.chunks(INFERENCE_BATCH) {
            let batch: Vec<&Instance> = chunk.iter().collect();
            let mut t = Tape::new(&self.params);
            let z = self.logits(&mut t, &batch, None);
            out.extend(logits_to_scores(t.value(z)));
        }
        out
    }

    pub fn predict_story(&self, story: &EncodedStory) -> f64 {
        mean(&self.predict_instances(&instances(story)))
    }
}

impl Trainable for Teacher {
    type Item = Instance;

    fn params(&self) -> &ParamStore {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn batch_loss(&self, t: &mut Tape, batch: &[&Instance], rng: Option<&mut Rng>) -> Var {
        let z = self.logits(t, batch, rng);
        t.bce_with_logits(z, batch.iter().map(|i| i.target).collect())
    }
}

/// Smoothed log-odds of FAKE for tokens seen at least `MIN_TOKEN_COUNT` times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenEvidence {
    pub log_odds: BTreeMap<String, f64>,
    /// The most discriminative tokens, used as presence indicators.
    pub top: Vec<String>,
}

impl TokenEvidence {
    fn fit<'a, I: Iterator<Item = (&'a [String], bool)>>(docs: I) -> Self {
        let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (tokens, fake) in docs {
            let mut seen: Vec<&str> = tokens.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for tok in seen {
                let e = counts.entry(tok).or_default();
                if fake {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let log_odds: BTreeMap<String, f64> = counts
            .into_iter()
            .filter(|(_, (f, t))| f + t >= MIN_TOKEN_COUNT)
            .map(|(tok, (f, t))| (tok.to_string(), ((f as f64 + 1.0) / (t as f64 + 1.0)).ln()))
            .collect();
        let mut ranked: Vec<(&String, f64)> = log_odds.iter().map(|(k, v)| (k, v.abs())).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let top = ranked.into_iter().take(TOP_TOKENS).map(|(k, _)| k.clone()).collect();
        Self { log_odds, top }
    }

    fn width(&self) -> usize {
        TOP_TOKENS + 3
    }

    fn features(&self, tokens: &[String], out: &mut Vec<f64>) {
        for t in &self.top {
            out.push(if tokens.contains(t) { 1.0 } else { 0.0 });
        }
        out.extend(std::iter::repeat_n(0.0, TOP_TOKENS - self.top.len()));
        let lo: Vec<f64> = tokens.iter().map(|t| self.log_odds.get(t).copied().unwrap_or(0.0)).collect();
        if lo.is_empty() {
            out.extend([0.0, 0.0, 0.0]);
        } else {
            out.push(mean(&lo));
            out.push(lo.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            out.push(lo.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
}

/// Student feature extraction; fitted on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub claim: TokenEvidence,
    pub text: TokenEvidence,
    pub sources: SourceStats,
    /// Training rows a neutralized group is drawn from.
    pub background: Vec<Vec<f64>>,
}

impl FeatureSpace {
    fn fit(train: &[EncodedStory], sources: &SourceStats) -> Self {
        let claim = TokenEvidence::fit(train.iter().map(|s| (s.headline_tokens.as_slice(), s.label.is_fake())));
        let text = TokenEvidence::fit(
            train
                .iter()
                .flat_map(|s| s.articles.iter().map(move |a| (a.token_text.as_slice(), s.label.is_fake()))),
        );
        let mut space = Self {
            claim,
            text,
            sources: sources.clone(),
            background: Vec::new(),
        };
        let rows: Vec<Vec<f64>> = train.iter().flat_map(|s| space.story_rows(s)).collect();
        let stride = rows.len().div_ceil(BACKGROUND_ROWS).max(1);
        space.background = rows.into_iter().step_by(stride).collect();
        space
    }

    pub fn width(&self) -> usize {
        self.claim.width() + self.text.width() + 2
    }

    pub fn group_range(&self, g: FeatureGroup) -> std::ops::Range<usize> {
        let c = self.claim.width();
        let t = self.text.width();
        match g {
            FeatureGroup::Claim => 0..c,
            FeatureGroup::Text => c..c + t,
            FeatureGroup::Source => c + t..c + t + 2,
        }
    }

    fn row(&self, headline: &[String], text: &[String], source: Option<&str>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        self.claim.features(headline, &mut out);
        self.text.features(text, &mut out);
        match source {
            Some(s) => {
                out.push(self.sources.frequency(s));
                out.push(self.sources.fake_prior(s));
            }
            None => out.extend([0.0, 0.5]),
        }
        out
    }

    /// One feature row per instance of `story`.
    pub fn story_rows(&self, story: &EncodedStory) -> Vec<Vec<f64>> {
        if story.articles.is_empty() {
            return vec![self.row(&story.headline_tokens, &[], None)];
        }
        story
            .articles
            .iter()
            .map(|a| self.row(&story.headline_tokens, &a.token_text, Some(&a.source)))
            .collect()
    }

    /// `row` with group `g` taken from `donor`.
    pub fn splice(&self, row: &[f64], donor: &[f64], g: FeatureGroup) -> Vec<f64> {
        let mut out = row.to_vec();
        for j in self.group_range(g) {
            out[j] = donor[j];
        }
        out
    }
}

/// Training notes stored with the model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MimicCard {
    pub teacher_loss_decreased: bool,
    pub warnings: Vec<String>,
    /// Student/teacher story-label agreement on the training split.
    pub training_fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct MimicModel {
    pub vocab_hash: String,
    pub teacher: Teacher,
    pub student: Gbdt,
    pub features: FeatureSpace,
    pub card: MimicCard,
}

impl MimicModel {
    pub fn train(
        train: &[EncodedStory],
        config: ModelConfig,
        student: GbdtConfig,
        encoder: &TextEncoder,
        init: Option<&EmbeddingTable>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        check_two_classes(train)?;
        let items: Vec<Instance> = train.iter().flat_map(instances).collect();
        let mut teacher = Teacher::new(config.clone(), encoder, init);
        teacher.history = fit(&mut teacher, &items, &config, "m3/teacher");
        let soft = teacher.predict_instances(&items);
        let features = FeatureSpace::fit(train, &encoder.sources);
        let rows: Vec<Vec<f64>> = train.iter().flat_map(|s| features.story_rows(s)).collect();
        let student = Gbdt::fit(&rows, &soft, student);
        let mut model = Self {
            vocab_hash: encoder.vocab_hash(),
            teacher,
            student,
            features,
            card: MimicCard::default(),
        };
        model.card.teacher_loss_decreased = model.teacher.history.decreased();
        if !model.card.teacher_loss_decreased {
            model
                .card
                .warnings
                .push("teacher training loss did not decrease; student mimics an unconverged teacher".into());
        }
        model.card.training_fidelity = model.fidelity(train);
        Ok(model)
    }

    fn student_row(&self, row: &[f64]) -> f64 {
        self.student.predict(row).clamp(0.0, 1.0)
    }

    pub fn student_score(&self, story: &EncodedStory) -> f64 {
        let rows = self.features.story_rows(story);
        mean(&rows.iter().map(|r| self.student_row(r)).collect::<Vec<_>>())
    }

    pub fn teacher_score(&self, story: &EncodedStory) -> f64 {
        self.teacher.predict_story(story)
    }

    /// Share of stories where student and teacher agree on the thresholded label.
    pub fn fidelity(&self, stories: &[EncodedStory]) -> f64 {
        if stories.is_empty() {
            return 0.0;
        }
        let items: Vec<Instance> = stories.iter().flat_map(instances).collect();
        let teacher = self.teacher.predict_instances(&items);
        let mut offset = 0;
        let mut agree = 0usize;
        for s in stories {
            let k = s.articles.len().max(1);
            let t = mean(&teacher[offset..offset + k]);
            offset += k;
            if (t >= 0.5) == (self.student_score(s) >= 0.5) {
                agree += 1;
            }
        }
        agree as f64 / stories.len() as f64
    }

    /// Raw occlusion deltas `[claim, text, source]` per article; empty for a
    /// story without articles.
    ///
    /// A group is neutralized by swapping in its values from each background
    /// row in turn; the delta is the absolute mean change of the student
    /// output. A group no tree splits on therefore scores exactly zero.
    pub fn occlusion(&self, story: &EncodedStory) -> Vec<[f64; 3]> {
        if story.articles.is_empty() {
            return Vec::new();
        }
        self.features
            .story_rows(story)
            .iter()
            .map(|row| {
                let full = self.student.predict(row);
                let bg = &self.features.background;
                FeatureGroup::ALL.map(|g| {
                    let total: f64 = bg
                        .iter()
                        .map(|d| full - self.student.predict(&self.features.splice(row, d, g)))
                        .sum();
                    (total / bg.len().max(1) as f64).abs()
                })
            })
            .collect()
    }
}

impl Detector for MimicModel {
    fn kind(&self) -> ModelKind {
        ModelKind::M3
    }

    fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    fn predict_scores(&self, stories: &[EncodedStory]) -> Vec<f64> {
        stories.iter().map(|s| self.student_score(s)).collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}
