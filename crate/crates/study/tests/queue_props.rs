mod common;

use newsxai_core::corpus::Label;
use newsxai_study::queue::{curate_queue, extend_queue, PATTERN_PERIOD};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn queue_pattern_holds(windows in 1usize..12, seed in any::<u64>(), pool_seed in 0u64..50, wrong_bias in 0usize..3) {
        let mut pool = common::pool(200, pool_seed);
        // vary how many model errors exist so overrides are exercised
        for (i, p) in pool.iter_mut().enumerate() {
            if i % 3 < wrong_bias {
                p.model_label = p.truth;
            }
        }
        let len = windows * PATTERN_PERIOD;
        let q = curate_queue(&pool, len, seed).unwrap();
        prop_assert_eq!(q.len(), len);
        for w in q.items.chunks(PATTERN_PERIOD) {
            prop_assert_eq!(w.iter().filter(|i| !i.displayed_correct()).count(), 1);
            prop_assert!(!w[3].displayed_correct());
            let trues = w.iter().filter(|i| i.truth == Label::True).count();
            prop_assert_eq!(trues, 2);
        }
        prop_assert_eq!(q.observed_accuracy(), 0.75);
        let (fp, fneg) = q.error_counts();
        prop_assert!(fp.abs_diff(fneg) <= 1);
        for it in &q.items {
            prop_assert_eq!(it.overridden, {
                let p = pool.iter().find(|p| p.story_id == it.story_id).unwrap();
                p.model_label != it.displayed_prediction
            });
        }
        let mut ids: Vec<&str> = q.items.iter().map(|i| i.story_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), len);
    }

    #[test]
    fn extension_keeps_prefix(windows in 1usize..6, more in 1usize..4, seed in any::<u64>()) {
        let pool = common::pool(150, 3);
        let q = curate_queue(&pool, windows * 4, seed).unwrap();
        let longer = extend_queue(&q, &pool, more).unwrap();
        prop_assert_eq!(&longer.items[..q.len()], &q.items[..]);
        prop_assert_eq!(longer.observed_accuracy(), 0.75);
    }
}

#[test]
fn veracity_alternates() {
    let q = curate_queue(&common::pool(100, 0), 8, 9).unwrap();
    let truths: Vec<Label> = q.items.iter().map(|i| i.truth).collect();
    use Label::*;
    assert_eq!(truths, vec![True, Fake, True, Fake, Fake, True, Fake, True]);
    assert_eq!(q.error_counts(), (1, 1));
}

#[test]
fn queue_file_round_trip() {
    let q = curate_queue(&common::pool(100, 0), 24, 1).unwrap();
    let text = serde_json::to_string(&q).unwrap();
    assert_eq!(serde_json::from_str::<newsxai_study::CuratedQueue>(&text).unwrap(), q);
}
