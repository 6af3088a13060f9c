#![allow(dead_code)]

use newsxai_core::corpus::Label;
use newsxai_study::PoolItem;

/// Pool with a mix of model-correct and model-wrong stories in each class.
pub fn pool(n: usize, seed: u64) -> Vec<PoolItem> {
    (0..n)
        .map(|i| {
            let truth = if (i as u64 + seed) % 2 == 0 { Label::True } else { Label::Fake };
            let wrong = (i as u64 * 7 + seed) % 5 == 0;
            let n_articles = 1 + (i % 3);
            PoolItem {
                story_id: format!("s{i:04}"),
                truth,
                model_label: if wrong { truth.flipped() } else { truth },
                model_confidence: 0.55 + (i % 9) as f64 * 0.05,
                article_ids: (0..n_articles).map(|k| format!("s{i:04}-a{k}")).collect(),
                bundle_ref: format!("s{i:04}"),
            }
        })
        .collect()
}
