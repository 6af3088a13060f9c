use newsxai_core::corpus::Label;
use newsxai_stats::analysis::{analyze_study, render_text, AnalysisPlan, GroupTest, Measure};
use newsxai_stats::{anova_oneway, GroupSample};
use newsxai_study::metrics::{build_report, MetricsRecord, Rate};
use newsxai_study::{curate_queue, simulate_participant, Policy, PoolItem, SimulationConfig, StudyCondition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn pool() -> Vec<PoolItem> {
    (0..400)
        .map(|i| {
            let truth = if i % 2 == 0 { Label::True } else { Label::Fake };
            PoolItem {
                story_id: format!("s{i:04}"),
                truth,
                model_label: if i % 6 == 0 { truth.flipped() } else { truth },
                model_confidence: 0.8,
                article_ids: vec![format!("s{i:04}-a0"), format!("s{i:04}-a1")],
                bundle_ref: format!("s{i:04}"),
            }
        })
        .collect()
}

fn cohort(p_agree: impl Fn(StudyCondition) -> f64, per_group: usize) -> Vec<MetricsRecord> {
    let pool = pool();
    let q = curate_queue(&pool, 24, 1).unwrap();
    let mut out = Vec::new();
    for c in StudyCondition::ALL {
        for i in 0..per_group {
            let cfg = SimulationConfig::with_policy(Policy::Independent { p_agree: p_agree(c) });
            let id = format!("{}-{i:03}", c.slug());
            let s = simulate_participant(&id, &q, c, &cfg, i as u64, Some(&pool)).unwrap();
            out.push(build_report(&s).unwrap());
        }
    }
    out
}

#[test]
fn planted_difference_is_detected() {
    let records = cohort(|c| if c == StudyCondition::XaiAttention { 0.3 } else { 0.9 }, 20);
    let report = analyze_study(&records, &AnalysisPlan::default());
    let row = report
        .rows
        .iter()
        .find(|r| r.measure == Measure::AgreementRate && r.test == GroupTest::Anova)
        .unwrap();
    let res = row.result.as_ref().unwrap();
    assert!(res.p_value < 0.05, "{res:?}");
    // baseline has no assistant: four groups
    assert_eq!(row.groups.len(), 4);
    assert_eq!(res.df[0], 3.0);
    let plan = AnalysisPlan::default();
    assert_eq!(report.rows.len(), plan.measures.len() * plan.tests.len());
    assert_eq!(report.correlations.len(), plan.correlations.len());
    let text = render_text(&report);
    assert!(text.contains("agreement_rate / anova"));
}

fn record(id: String, condition: StudyCondition, v: f64) -> MetricsRecord {
    let rate = Rate {
        numerator: 0,
        denominator: 12,
        value: Some(v),
    };
    MetricsRecord {
        session_id: id,
        condition,
        credibility: rate,
        incredibility: rate,
        agreement_rate: Some(rate),
        prediction_task_accuracy: rate,
        engagement_rate: Some(rate),
        perceived_accuracy: Some(v * 100.0),
        expected_ai_accuracy: Some(70.0),
        estimated_fake_rate: Some(50.0),
        duration_minutes: 20.0,
        click_count: 10,
        shared: 12,
        reported: 4,
        skipped: 0,
    }
}

#[test]
fn identical_groups_are_never_significant() {
    let records: Vec<MetricsRecord> = StudyCondition::ALL
        .into_iter()
        .flat_map(|c| (0..6).map(move |i| record(format!("{}-{i}", c.slug()), c, 0.5 + 0.05 * i as f64)))
        .collect();
    let report = analyze_study(&records, &AnalysisPlan::default());
    for row in &report.rows {
        if let (GroupTest::Anova | GroupTest::Levene | GroupTest::TukeyHsd, Some(r)) = (row.test, &row.result) {
            assert!(r.p_value > 0.999, "{:?} {:?}: {}", row.measure, row.test, r.p_value);
        }
    }
}

#[test]
fn short_sessions_are_filtered_and_small_groups_skipped() {
    let mut records: Vec<MetricsRecord> = StudyCondition::ALL
        .into_iter()
        .flat_map(|c| (0..4).map(move |i| record(format!("{}-{i}", c.slug()), c, 0.1 * i as f64)))
        .collect();
    for r in records.iter_mut().filter(|r| r.condition == StudyCondition::Ai).skip(1) {
        r.duration_minutes = 5.0;
    }
    let report = analyze_study(&records, &AnalysisPlan::default());
    assert_eq!(report.excluded.len(), 3);
    assert_eq!(report.retained, 17);
    assert!(report.rows.iter().all(|r| r.skipped.as_deref() == Some("condition AI has 1 retained participant(s)")));
}

#[test]
fn report_is_reproducible() {
    let records = cohort(|_| 0.6, 4);
    let a = serde_json::to_string_pretty(&analyze_study(&records, &AnalysisPlan::default())).unwrap();
    let mut shuffled = records.clone();
    shuffled.reverse();
    let b = serde_json::to_string_pretty(&analyze_study(&shuffled, &AnalysisPlan::default())).unwrap();
    assert_eq!(a, b);
}

#[test]
fn null_permutation_rate() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let values: Vec<f64> = (0..90).map(|_| (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0).collect();
    let mut labels: Vec<usize> = (0..90).map(|i| i % 3).collect();
    let mut hits = 0;
    for _ in 0..1000 {
        labels.shuffle(&mut rng);
        let groups: Vec<GroupSample> = (0..3)
            .map(|g| GroupSample::new(g.to_string(), values.iter().zip(&labels).filter(|(_, &l)| l == g).map(|(v, _)| *v).collect()))
            .collect();
        if anova_oneway(&groups).unwrap().p_value < 0.05 {
            hits += 1;
        }
    }
    let rate = hits as f64 / 1000.0;
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}
