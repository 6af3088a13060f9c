//! Building the curation pool from precomputed explanation bundles.

use std::collections::BTreeMap;

use newsxai_core::corpus::Label;
use newsxai_models::ensemble::confidence;
use newsxai_models::explain::ExplanationBundle;

use crate::queue::PoolItem;

/// One pool item per bundle whose story has a known label; the bundle is
/// referenced by story id.
pub fn pool_from_bundles(bundles: &[ExplanationBundle], truth: &BTreeMap<String, Label>) -> Vec<PoolItem> {
    bundles
        .iter()
        .filter_map(|b| {
            let truth = *truth.get(&b.story_id)?;
            Some(PoolItem {
                story_id: b.story_id.clone(),
                truth,
                model_label: b.prediction.label,
                model_confidence: confidence(b.prediction.score),
                article_ids: b.article_ids().into_iter().map(String::from).collect(),
                bundle_ref: b.story_id.clone(),
            })
        })
        .collect()
}
