use newsxai_core::corpus::{Corpus, Label};
use newsxai_core::synth::{generate, SignalMode, SynthConfig};
use newsxai_core::textprep::TextBounds;
use newsxai_models::article_attention::ArticleAttentionModel;
use newsxai_models::ensemble::{Ensemble, EnsembleConfig};
use newsxai_models::explain::{build_bundles, AttributeImportance, ExplanationBundle};
use newsxai_models::gbdt::GbdtConfig;
use newsxai_models::headline::HeadlineModel;
use newsxai_models::hierarchical::HierarchicalModel;
use newsxai_models::mimic::{instances, FeatureGroup, MimicModel, Teacher};
use newsxai_models::train::{gradient_check, Trainable};
use newsxai_models::{artifact, Detector, EncodedStory, ModelConfig, ModelError, TextEncoder};

fn tiny_config() -> ModelConfig {
    ModelConfig {
        hidden_size: 4,
        embedding_dim: 6,
        attention_size: 3,
        epochs: 2,
        batch_size: 8,
        ..ModelConfig::default()
    }
}

fn corpus(stories: usize, mode: SignalMode) -> Corpus {
    generate(&SynthConfig {
        stories,
        mode,
        ..SynthConfig::default()
    })
    .corpus()
}

fn encoded(corpus: &Corpus) -> (TextEncoder, Vec<EncodedStory>) {
    let all: Vec<_> = corpus.stories().iter().collect();
    let enc = TextEncoder::fit(&all, 1, TextBounds::default()).unwrap();
    let stories = enc.encode_all(all.iter().copied());
    (enc, stories)
}

fn small_ensemble(stories: &[EncodedStory], enc: &TextEncoder) -> Ensemble {
    let cfg = EnsembleConfig {
        m3_student: GbdtConfig::default(),
        ..EnsembleConfig::uniform(tiny_config())
    };
    Ensemble::train(enc.clone(), stories, &cfg, None).unwrap()
}

fn check<M: Trainable>(model: &mut M, batch: &[&M::Item]) {
    let report = gradient_check(model, batch, 12, 3);
    assert!(report.checked > 50);
    assert!(
        report.max_relative_error < 1e-3,
        "worst {} at {}",
        report.max_relative_error,
        report.worst_param
    );
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let c = corpus(12, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let mut batch: Vec<&EncodedStory> = stories.iter().take(5).collect();
    let mut no_articles = stories[5].clone();
    no_articles.articles.clear();
    batch[4] = &no_articles;
    let cfg = ModelConfig {
        dropout: 0.0,
        ..tiny_config()
    };
    check(&mut HeadlineModel::new(cfg.clone(), &enc, None), &batch);
    check(&mut HierarchicalModel::new(cfg.clone(), &enc, None), &batch);
    check(&mut ArticleAttentionModel::new(cfg.clone(), &enc, None), &batch);
    let items: Vec<_> = batch.iter().flat_map(|s| instances(s)).take(5).collect();
    let refs: Vec<_> = items.iter().collect();
    check(&mut Teacher::new(cfg, &enc, None), &refs);
}

#[test]
fn single_class_training_is_rejected() {
    let c = corpus(20, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let fakes: Vec<EncodedStory> = stories.into_iter().filter(|s| s.label == Label::Fake).collect();
    for r in [
        HeadlineModel::train(&fakes, tiny_config(), &enc, None).map(|_| ()),
        HierarchicalModel::train(&fakes, tiny_config(), &enc, None).map(|_| ()),
        ArticleAttentionModel::train(&fakes, tiny_config(), &enc, None).map(|_| ()),
        MimicModel::train(&fakes, tiny_config(), GbdtConfig::default(), &enc, None).map(|_| ()),
    ] {
        assert!(matches!(r, Err(ModelError::SingleClass(Label::Fake))));
    }
    assert!(matches!(
        HeadlineModel::train(&[], tiny_config(), &enc, None),
        Err(ModelError::EmptyTraining)
    ));
}

#[test]
fn fixed_seed_training_is_reproducible() {
    let c = corpus(40, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let a = HierarchicalModel::train(&stories, tiny_config(), &enc, None).unwrap();
    let b = HierarchicalModel::train(&stories, tiny_config(), &enc, None).unwrap();
    assert_eq!(a.params().checksum(), b.params().checksum());
    let other = HierarchicalModel::train(
        &stories,
        ModelConfig {
            seed: 8,
            ..tiny_config()
        },
        &enc,
        None,
    )
    .unwrap();
    assert_ne!(a.params().checksum(), other.params().checksum());
}

#[test]
fn training_loss_decreases() {
    let c = corpus(120, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let cfg = ModelConfig {
        epochs: 4,
        ..tiny_config()
    };
    let m = HeadlineModel::train(&stories, cfg, &enc, None).unwrap();
    assert!(m.history.decreased(), "{:?}", m.history.epoch_losses);
}

fn assert_unit_sum(xs: &[f64]) {
    assert!(xs.iter().all(|&x| x >= 0.0));
    assert!((xs.iter().sum::<f64>() - 1.0).abs() <= 1e-6, "{xs:?}");
}

#[test]
fn attention_vectors_are_distributions() {
    let c = corpus(30, SignalMode::Triggers);
    let (enc, mut stories) = encoded(&c);
    stories[0].articles.truncate(1);
    stories[1].articles.clear();
    let m1 = HeadlineModel::new(tiny_config(), &enc, None);
    let m2 = HierarchicalModel::new(tiny_config(), &enc, None);
    let m4 = ArticleAttentionModel::new(tiny_config(), &enc, None);
    for o in m1.explain(&stories) {
        assert_unit_sum(&o.attention);
    }
    let h = m2.explain(&stories);
    assert_eq!(h[0].article_attention, vec![1.0]);
    assert!(h[1].article_attention.is_empty());
    for o in &h {
        assert!((0.0..=1.0).contains(&o.score));
        if !o.article_attention.is_empty() {
            assert_unit_sum(&o.article_attention);
        }
        for s in &o.sentence_attention {
            assert_unit_sum(s);
        }
    }
    let a = m4.explain(&stories);
    assert!(a[1].token_attention.is_empty());
    assert!((0.0..=1.0).contains(&a[1].score));
    for o in &a {
        for t in &o.token_attention {
            assert_unit_sum(t);
        }
    }
}

#[test]
fn batching_does_not_change_scores() {
    let c = corpus(80, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let m4 = ArticleAttentionModel::new(tiny_config(), &enc, None);
    let all = m4.predict_scores(&stories);
    for (i, s) in stories.iter().enumerate().step_by(13) {
        let alone = m4.predict_scores(std::slice::from_ref(s));
        assert!((alone[0] - all[i]).abs() < 1e-12);
    }
}

#[test]
fn ensemble_bundles_and_artifacts() {
    let c = corpus(60, SignalMode::Triggers);
    let (enc, mut stories) = encoded(&c);
    stories[3].articles.clear();
    let ens = small_ensemble(&stories, &enc);

    let preds = ens.predict(&stories);
    for p in &preds {
        let mean = p.member_scores.iter().sum::<f64>() / 4.0;
        assert!((p.score - mean).abs() <= 1e-9);
        assert_eq!(p.label.is_fake(), p.score >= 0.5);
    }

    let bundles = build_bundles(&ens, &stories, 0.05).unwrap();
    assert_eq!(bundles, build_bundles(&ens, &stories, 0.05).unwrap());
    for (b, s) in bundles.iter().zip(&stories) {
        let ids: Vec<&str> = s.articles.iter().map(|a| a.article_id.as_str()).collect();
        assert_eq!(b.article_ids(), ids);
        assert_eq!(b.article_heatmaps.len(), ids.len());
        assert_eq!(b.attribute_importance.len(), ids.len());
        assert_eq!(b.top_sentences.len(), ids.len());
        assert_eq!(b.article_attribution.empty, ids.is_empty());
        if !ids.is_empty() {
            assert_unit_sum(&b.article_attribution.scores.iter().map(|a| a.score).collect::<Vec<_>>());
        }
        for imp in &b.attribute_importance {
            assert_unit_sum(&imp.importance.as_array());
        }
        let max = b.headline_heatmap.entries.iter().map(|e| e.score).fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        let json = serde_json::to_string(b).unwrap();
        let back: ExplanationBundle = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, b);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
    assert!(bundles[3].article_heatmaps.is_empty());

    let dir = tempfile::tempdir().unwrap();
    artifact::save_ensemble(&ens, dir.path(), &Default::default()).unwrap();
    let loaded = artifact::load_ensemble(dir.path()).unwrap();
    assert_eq!(loaded.predict(&stories), preds);
    assert_eq!(build_bundles(&loaded, &stories, 0.05).unwrap(), bundles);

    std::fs::write(dir.path().join("m2").join("params.json"), b"[]").unwrap();
    assert!(artifact::load_ensemble(dir.path()).is_err());
}

#[test]
fn mismatched_vocabularies_are_rejected() {
    let c = corpus(30, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let other_corpus = corpus(10, SignalMode::SourceOnly);
    let (other, _) = encoded(&other_corpus);
    let cfg = tiny_config();
    let r = Ensemble::new(
        enc.clone(),
        HeadlineModel::new(cfg.clone(), &other, None),
        HierarchicalModel::new(cfg.clone(), &enc, None),
        MimicModel::train(&stories, cfg.clone(), GbdtConfig::default(), &enc, None).unwrap(),
        ArticleAttentionModel::new(cfg, &enc, None),
    );
    assert!(matches!(r, Err(ModelError::VocabularyMismatch(..))));
}

#[test]
fn student_has_sixty_trees_and_base_score_fallback() {
    let c = corpus(60, SignalMode::Triggers);
    let (enc, stories) = encoded(&c);
    let m3 = MimicModel::train(&stories, tiny_config(), GbdtConfig::default(), &enc, None).unwrap();
    assert_eq!(m3.student.trees.len(), 60);
    let rows = m3.features.story_rows(&stories[0]);
    assert_eq!(m3.student.predict_with_trees(&rows[0], 0), m3.student.base_score);
    assert_eq!(m3.student.predict(&rows[0]), m3.student.predict(&rows[0].clone()));
}

#[test]
fn unused_source_group_has_zero_importance() {
    let generated = generate(&SynthConfig {
        stories: 60,
        ..SynthConfig::default()
    });
    let mut articles = generated.articles.clone();
    for a in &mut articles {
        a.source = "https://www.onlyone.com/x".into();
    }
    let c = Corpus::from_records(generated.claims.clone(), articles).unwrap();
    let (enc, stories) = encoded(&c);
    let m3 = MimicModel::train(&stories, tiny_config(), GbdtConfig::default(), &enc, None).unwrap();
    for j in m3.features.group_range(FeatureGroup::Source) {
        assert!(!m3.student.uses_feature(j));
    }
    for s in &stories {
        for raw in m3.occlusion(s) {
            assert_eq!(raw[2], 0.0);
        }
    }
}

#[test]
fn source_only_signal_is_attributed_to_source() {
    let c = corpus(800, SignalMode::SourceOnly);
    let all: Vec<_> = c.stories().iter().collect();
    let (train, test) = all.split_at(640);
    let enc = TextEncoder::fit(train, 1, TextBounds::default()).unwrap();
    let tr = enc.encode_all(train.iter().copied());
    let te = enc.encode_all(test.iter().copied());
    let m3 = MimicModel::train(&tr, ModelConfig::default(), GbdtConfig::default(), &enc, None).unwrap();
    let (mut top, mut n) = (0, 0);
    for s in &te {
        for raw in m3.occlusion(s) {
            let a = AttributeImportance::from_raw(raw);
            n += 1;
            if a.source > a.claim && a.source > a.text {
                top += 1;
            }
        }
    }
    let share = top as f64 / n as f64;
    assert!(share >= 0.8, "source was the largest component on {share:.3} of instances");
}
