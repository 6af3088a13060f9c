//! On-disk model artifacts.
//!
//! ```text
//! <dir>/encoder.json          vocabulary, source statistics, bounds
//! <dir>/<m>/config.json       ModelConfig
//! <dir>/<m>/params.json       named weight tensors
//! <dir>/<m>/card.json         ModelCard
//! <dir>/m3/student.json       boosted trees, feature space, mimic notes
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::article_attention::ArticleAttentionModel;
use crate::autodiff::NamedTensor;
use crate::encode::TextEncoder;
use crate::ensemble::Ensemble;
use crate::evaluate::AccuracyReport;
use crate::gbdt::Gbdt;
use crate::headline::HeadlineModel;
use crate::hierarchical::HierarchicalModel;
use crate::mimic::{FeatureSpace, MimicCard, MimicModel, Teacher};
use crate::train::{ModelConfig, Trainable, TrainingHistory};
use crate::{ModelError, ModelKind};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCard {
    pub format_version: u32,
    pub model: ModelKind,
    pub vocab_hash: String,
    pub params_checksum: String,
    pub history: TrainingHistory,
    pub warnings: Vec<String>,
    /// Held-out evaluation, when one was run before saving.
    pub evaluation: Option<AccuracyReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StudentFile {
    student: Gbdt,
    features: FeatureSpace,
    card: MimicCard,
}

fn err(path: &Path, reason: impl ToString) -> ModelError {
    ModelError::Artifact {
        path: path.display().to_string(),
        reason: reason.to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ModelError> {
    let bytes = serde_json::to_vec_pretty(value).map_err(|e| err(path, e))?;
    fs::write(path, bytes).map_err(|e| err(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ModelError> {
    let bytes = fs::read(path).map_err(|e| err(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| err(path, e))
}

fn save_member<M: Trainable>(
    dir: &Path,
    kind: ModelKind,
    model: &M,
    config: &ModelConfig,
    history: &TrainingHistory,
    vocab_hash: &str,
    warnings: Vec<String>,
    evaluation: Option<AccuracyReport>,
) -> Result<(), ModelError> {
    let d = dir.join(kind.name());
    fs::create_dir_all(&d).map_err(|e| err(&d, e))?;
    write_json(&d.join("config.json"), config)?;
    write_json(&d.join("params.json"), &model.params().to_tensors())?;
    write_json(
        &d.join("card.json"),
        &ModelCard {
            format_version: FORMAT_VERSION,
            model: kind,
            vocab_hash: vocab_hash.to_string(),
            params_checksum: model.params().checksum(),
            history: history.clone(),
            warnings,
            evaluation,
        },
    )
}

fn load_member<M: Trainable>(
    dir: &Path,
    kind: ModelKind,
    vocab_hash: &str,
    build: impl FnOnce(ModelConfig) -> M,
) -> Result<(M, ModelCard), ModelError> {
    let d = dir.join(kind.name());
    let config: ModelConfig = read_json(&d.join("config.json"))?;
    let card: ModelCard = read_json(&d.join("card.json"))?;
    if card.format_version != FORMAT_VERSION {
        return Err(err(&d, format!("unsupported format version {}", card.format_version)));
    }
    if card.vocab_hash != vocab_hash {
        return Err(ModelError::VocabularyMismatch(vocab_hash.to_string(), card.vocab_hash));
    }
    let tensors: Vec<NamedTensor> = read_json(&d.join("params.json"))?;
    let mut model = build(config);
    model.params_mut().load_tensors(&tensors).map_err(|e| err(&d, e))?;
    if model.params().checksum() != card.params_checksum {
        return Err(err(&d, "parameter checksum does not match model card"));
    }
    Ok((model, card))
}

/// Writes the encoder and all four members under `dir`.
pub fn save_ensemble(
    models: &Ensemble,
    dir: &Path,
    evaluations: &BTreeMap<ModelKind, AccuracyReport>,
) -> Result<(), ModelError> {
    fs::create_dir_all(dir).map_err(|e| err(dir, e))?;
    write_json(&dir.join("encoder.json"), &models.encoder)?;
    let hash = models.vocab_hash();
    let eval = |k| evaluations.get(&k).cloned();
    save_member(dir, ModelKind::M1, &models.m1, &models.m1.config, &models.m1.history, &hash, vec![], eval(ModelKind::M1))?;
    save_member(dir, ModelKind::M2, &models.m2, &models.m2.config, &models.m2.history, &hash, vec![], eval(ModelKind::M2))?;
    let teacher = &models.m3.teacher;
    save_member(
        dir,
        ModelKind::M3,
        teacher,
        &teacher.config,
        &teacher.history,
        &hash,
        models.m3.card.warnings.clone(),
        eval(ModelKind::M3),
    )?;
    write_json(
        &dir.join(ModelKind::M3.name()).join("student.json"),
        &StudentFile {
            student: models.m3.student.clone(),
            features: models.m3.features.clone(),
            card: models.m3.card.clone(),
        },
    )?;
    save_member(dir, ModelKind::M4, &models.m4, &models.m4.config, &models.m4.history, &hash, vec![], eval(ModelKind::M4))
}

pub fn load_encoder(dir: &Path) -> Result<TextEncoder, ModelError> {
    Ok(read_json::<TextEncoder>(&dir.join("encoder.json"))?.reindexed())
}

/// Loads what [`save_ensemble`] wrote, verifying vocabulary hashes and
/// parameter checksums.
pub fn load_ensemble(dir: &Path) -> Result<Ensemble, ModelError> {
    let encoder = load_encoder(dir)?;
    let hash = encoder.vocab_hash();
    let (mut m1, c1) = load_member(dir, ModelKind::M1, &hash, |c| HeadlineModel::new(c, &encoder, None))?;
    m1.history = c1.history;
    let (mut m2, c2) = load_member(dir, ModelKind::M2, &hash, |c| HierarchicalModel::new(c, &encoder, None))?;
    m2.history = c2.history;
    let (mut teacher, c3) = load_member(dir, ModelKind::M3, &hash, |c| Teacher::new(c, &encoder, None))?;
    teacher.history = c3.history;
    let student: StudentFile = read_json(&dir.join(ModelKind::M3.name()).join("student.json"))?;
    let m3 = MimicModel {
        vocab_hash: hash.clone(),
        teacher,
        student: student.student,
        features: student.features,
        card: student.card,
    };
    let (mut m4, c4) = load_member(dir, ModelKind::M4, &hash, |c| ArticleAttentionModel::new(c, &encoder, None))?;
    m4.history = c4.history;
    Ensemble::new(encoder, m1, m2, m3, m4)
}

pub fn load_card(dir: &Path, kind: ModelKind) -> Result<ModelCard, ModelError> {
    read_json(&dir.join(kind.name()).join("card.json"))
}
