use newsxai_models::ensemble::EnsemblePrediction;
use newsxai_models::evaluate::AccuracyReport;
use newsxai_models::explain::{normalize, rescale_heatmap, top_k, AttributeImportance};
use newsxai_core::corpus::Label;
use proptest::prelude::*;

proptest! {
    #[test]
    fn heatmap_is_monotone_and_bounded(raw in prop::collection::vec(0.0f64..1.0, 1..30), eps in 0.0f64..0.5) {
        let out = rescale_heatmap(&raw, eps);
        prop_assert_eq!(out.len(), raw.len());
        for &x in &out {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        if raw.iter().any(|&x| x > 0.0) {
            prop_assert_eq!(out.iter().copied().fold(0.0, f64::max), 1.0);
        }
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    prop_assert!(out[i] <= out[j]);
                }
            }
        }
    }

    #[test]
    fn normalized_scores_sum_to_one(raw in prop::collection::vec(0.0f64..10.0, 1..20)) {
        let n = normalize(&raw);
        prop_assert!((n.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn importance_sums_to_one(a in 0.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0) {
        let imp = AttributeImportance::from_raw([a, b, c]);
        prop_assert!((imp.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn top_k_is_sorted_and_sized(raw in prop::collection::vec(0.0f64..1.0, 0..10)) {
        let idx = top_k(&raw, 3);
        prop_assert_eq!(idx.len(), raw.len().min(3));
        for w in idx.windows(2) {
            prop_assert!(raw[w[0]] > raw[w[1]] || (raw[w[0]] == raw[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn ensemble_score_is_member_mean(s in prop::array::uniform4(0.0f64..=1.0)) {
        let p = EnsemblePrediction::from_members(s);
        prop_assert!((p.score - s.iter().sum::<f64>() / 4.0).abs() <= 1e-9);
        prop_assert_eq!(p.label == Label::Fake, p.score >= 0.5);
        prop_assert!((0.5..=1.0).contains(&p.headline_confidence));
        prop_assert!((0.5..=1.0).contains(&p.articles_confidence));
    }

    #[test]
    fn report_matches_recount(pairs in prop::collection::vec((any::<bool>(), 0.0f64..1.0), 1..60)) {
        let truth: Vec<Label> = pairs.iter().map(|p| if p.0 { Label::Fake } else { Label::True }).collect();
        let scores: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = AccuracyReport::from_scores(&truth, &scores).unwrap();
        let mut tp = 0; let mut fp = 0; let mut tn = 0; let mut fneg = 0;
        for (t, s) in truth.iter().zip(&scores) {
            match (*t == Label::Fake, *s >= 0.5) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
                (true, false) => fneg += 1,
            }
        }
        prop_assert_eq!(r.confusion.true_positive, tp);
        prop_assert_eq!(r.confusion.false_positive, fp);
        prop_assert_eq!(r.confusion.true_negative, tn);
        prop_assert_eq!(r.confusion.false_negative, fneg);
        prop_assert_eq!(r.accuracy, (tp + tn) as f64 / pairs.len() as f64);
    }
}
