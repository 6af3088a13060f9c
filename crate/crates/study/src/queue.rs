//! Curated review queues with a fixed displayed-error pattern.
//!
//! Items come in windows of four. Even windows carry veracity
//! `[TRUE, FAKE, TRUE, FAKE]` and odd windows `[FAKE, TRUE, FAKE, TRUE]`; the
//! fourth slot of every window shows a wrong prediction, so errors alternate
//! between false negatives and false positives and exactly three of every
//! four displayed predictions are right.
//!
//! Each slot is filled from the pool cell (truth, model correct?) that lets
//! the real ensemble output fit the slot. When that cell is used up, a story
//! from the other cell of the same truth class is taken and its displayed
//! label is overridden; the item is flagged.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use newsxai_core::corpus::Label;
use newsxai_core::rng;

pub const PATTERN_PERIOD: usize = 4;
pub const DEFAULT_QUEUE_LENGTH: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum QueueError {
    #[error("queue length must be a positive multiple of 4, got {0}")]
    BadLength(usize),
    #[error("pool has no {truth} stories left for slot {position} (cells {truth}×correct and {truth}×wrong are empty)")]
    Exhausted { truth: Label, position: usize },
    #[error("extended queue does not preserve the existing prefix")]
    PrefixMismatch,
}

/// A candidate story with the ensemble's real output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolItem {
    pub story_id: String,
    pub truth: Label,
    pub model_label: Label,
    pub model_confidence: f64,
    pub article_ids: Vec<String>,
    /// Key of the story's explanation bundle.
    pub bundle_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueItem {
    /// 1-based position in the queue.
    pub position: usize,
    pub story_id: String,
    pub truth: Label,
    pub displayed_prediction: Label,
    pub displayed_confidence: f64,
    pub is_forced_error: bool,
    /// The displayed label differs from the model's own output.
    pub overridden: bool,
    pub bundle_ref: String,
    pub article_ids: Vec<String>,
}

impl QueueItem {
    pub fn displayed_correct(&self) -> bool {
        self.displayed_prediction == self.truth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedQueue {
    pub seed: u64,
    pub pattern_period: usize,
    pub items: Vec<QueueItem>,
}

/// Error-position and veracity rule for a 1-based position.
pub fn slot(position: usize) -> (Label, bool) {
    let window = (position - 1) / PATTERN_PERIOD;
    let offset = (position - 1) % PATTERN_PERIOD;
    let starts_true = window % 2 == 0;
    let truth = if (offset % 2 == 0) == starts_true {
        Label::True
    } else {
        Label::Fake
    };
    (truth, offset == PATTERN_PERIOD - 1)
}

impl CuratedQueue {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&QueueItem> {
        self.items.get(index)
    }

    pub fn observed_accuracy(&self) -> f64 {
        self.items.iter().filter(|i| i.displayed_correct()).count() as f64 / self.items.len().max(1) as f64
    }

    /// (false positives, false negatives) among displayed predictions.
    pub fn error_counts(&self) -> (usize, usize) {
        let fp = self
            .items
            .iter()
            .filter(|i| i.truth == Label::True && i.displayed_prediction == Label::Fake)
            .count();
        let fneg = self
            .items
            .iter()
            .filter(|i| i.truth == Label::Fake && i.displayed_prediction == Label::True)
            .count();
        (fp, fneg)
    }

    pub fn override_count(&self) -> usize {
        self.items.iter().filter(|i| i.overridden).count()
    }
}

/// Curates `length` items from `pool`. Stories without articles are left
/// out, since sharing requires selecting one.
///
/// The result for a longer length always starts with the result for a
/// shorter one, which is what [`extend_queue`] relies on.
pub fn curate_queue(pool: &[PoolItem], length: usize, seed: u64) -> Result<CuratedQueue, QueueError> {
    if length == 0 || length % PATTERN_PERIOD != 0 {
        return Err(QueueError::BadLength(length));
    }
    let mut cells: BTreeMap<(Label, bool), Vec<&PoolItem>> = BTreeMap::new();
    let mut sorted: Vec<&PoolItem> = pool.iter().filter(|p| !p.article_ids.is_empty()).collect();
    sorted.sort_by(|a, b| a.story_id.cmp(&b.story_id));
    sorted.dedup_by(|a, b| a.story_id == b.story_id);
    for p in sorted {
        cells.entry((p.truth, p.model_label == p.truth)).or_default().push(p);
    }
    let mut r = rng::seeded(seed, "queue");
    for truth in [Label::True, Label::Fake] {
        for correct in [true, false] {
            cells.entry((truth, correct)).or_default().shuffle(&mut r);
        }
    }
    let mut items = Vec::with_capacity(length);
    for position in 1..=length {
        let (truth, is_error) = slot(position);
        let want_correct = !is_error;
        let (item, overridden) = match cells.get_mut(&(truth, want_correct)).and_then(|c| c.pop()) {
            Some(p) => (p, false),
            None => match cells.get_mut(&(truth, !want_correct)).and_then(|c| c.pop()) {
                Some(p) => (p, true),
                None => return Err(QueueError::Exhausted { truth, position }),
            },
        };
        let displayed = if want_correct { truth } else { truth.flipped() };
        items.push(QueueItem {
            position,
            story_id: item.story_id.clone(),
            truth,
            displayed_prediction: displayed,
            displayed_confidence: item.model_confidence,
            is_forced_error: is_error,
            overridden,
            bundle_ref: item.bundle_ref.clone(),
            article_ids: item.article_ids.clone(),
        });
    }
    Ok(CuratedQueue {
        seed,
        pattern_period: PATTERN_PERIOD,
        items,
    })
}

/// Longer version of `queue` with `windows` more windows of four.
pub fn extend_queue(queue: &CuratedQueue, pool: &[PoolItem], windows: usize) -> Result<CuratedQueue, QueueError> {
    let longer = curate_queue(pool, queue.len() + windows * PATTERN_PERIOD, queue.seed)?;
    if longer.items[..queue.len()] != queue.items[..] {
        return Err(QueueError::PrefixMismatch);
    }
    Ok(longer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: usize) -> Vec<PoolItem> {
        (0..n)
            .map(|i| {
                let truth = if i % 2 == 0 { Label::True } else { Label::Fake };
                PoolItem {
                    story_id: format!("s{i:03}"),
                    truth,
                    model_label: if i % 5 == 0 { truth.flipped() } else { truth },
                    model_confidence: 0.6 + (i % 4) as f64 * 0.1,
                    article_ids: vec![format!("s{i:03}-a0")],
                    bundle_ref: format!("s{i:03}"),
                }
            })
            .collect()
    }

    #[test]
    fn sixteen_item_pattern() {
        let q = curate_queue(&pool(100), 16, 1).unwrap();
        let wrong: Vec<usize> = q.items.iter().filter(|i| !i.displayed_correct()).map(|i| i.position).collect();
        assert_eq!(wrong, vec![4, 8, 12, 16]);
        assert_eq!(q.observed_accuracy(), 0.75);
        assert_eq!(q.error_counts(), (2, 2));
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let p = pool(100);
        assert_eq!(curate_queue(&p, 24, 3).unwrap(), curate_queue(&p, 24, 3).unwrap());
        let short = curate_queue(&p, 16, 3).unwrap();
        let long = extend_queue(&short, &p, 2).unwrap();
        assert_eq!(long.len(), 24);
        assert_eq!(&long.items[..16], &short.items[..]);
    }

    #[test]
    fn overrides_when_cell_is_empty() {
        // every model output is correct, so error slots need overrides
        let mut p = pool(60);
        for item in &mut p {
            item.model_label = item.truth;
        }
        let q = curate_queue(&p, 8, 0).unwrap();
        assert_eq!(q.override_count(), 2);
        assert!(q.items.iter().filter(|i| i.overridden).all(|i| i.is_forced_error));
        assert_eq!(q.observed_accuracy(), 0.75);
    }

    #[test]
    fn errors() {
        assert_eq!(curate_queue(&pool(50), 10, 0), Err(QueueError::BadLength(10)));
        assert_eq!(curate_queue(&pool(50), 0, 0), Err(QueueError::BadLength(0)));
        let only_true: Vec<PoolItem> = pool(40).into_iter().filter(|p| p.truth == Label::True).collect();
        assert_eq!(
            curate_queue(&only_true, 4, 0),
            Err(QueueError::Exhausted {
                truth: Label::Fake,
                position: 2
            })
        );
    }

    #[test]
    fn stories_without_articles_are_excluded() {
        let mut p = pool(40);
        for item in p.iter_mut().take(20) {
            item.article_ids.clear();
        }
        let q = curate_queue(&p, 16, 0).unwrap();
        assert!(q.items.iter().all(|i| !i.article_ids.is_empty()));
    }
}
