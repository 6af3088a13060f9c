#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use newsxai_core::corpus::Label;
use newsxai_models::ensemble::EnsemblePrediction;
use newsxai_models::explain::{
    ArticleAttribution, ArticleImportance, ArticleScore, ArticleTopSentences, AttributeImportance, ExplanationBundle,
    HeatmapEntry, HeatmapScope, KeywordHeatmap, RankedSentence,
};
use newsxai_service::payload::{ArticleView, StoryContent};
use newsxai_service::store::SessionStore;
use newsxai_service::{router, AppState, Assignment, StudyDeployment};
use newsxai_study::{curate_queue, PoolItem};

pub const STUDY: &str = "pilot";

fn heatmap(scope: HeatmapScope, words: &[&str]) -> KeywordHeatmap {
    KeywordHeatmap {
        scope,
        entries: words
            .iter()
            .enumerate()
            .map(|(i, w)| HeatmapEntry {
                token: w.to_string(),
                score: 1.0 / (i + 1) as f64,
            })
            .collect(),
        threshold_applied: 0.05,
    }
}

fn bundle(p: &PoolItem) -> ExplanationBundle {
    let s = if p.model_label == Label::Fake { p.model_confidence } else { 1.0 - p.model_confidence };
    ExplanationBundle {
        story_id: p.story_id.clone(),
        prediction: EnsemblePrediction::from_members([s; 4]),
        headline_heatmap: heatmap(HeatmapScope::Headline, &["claim", "about", "x"]),
        article_heatmaps: p
            .article_ids
            .iter()
            .map(|a| heatmap(HeatmapScope::Article { article_id: a.clone() }, &["body", "text"]))
            .collect(),
        article_attribution: ArticleAttribution {
            empty: false,
            scores: p
                .article_ids
                .iter()
                .map(|a| ArticleScore {
                    article_id: a.clone(),
                    score: 1.0 / p.article_ids.len() as f64,
                })
                .collect(),
        },
        attribute_importance: p
            .article_ids
            .iter()
            .map(|a| ArticleImportance {
                article_id: a.clone(),
                importance: AttributeImportance::from_raw([1.0, 2.0, 1.0]),
            })
            .collect(),
        top_sentences: p
            .article_ids
            .iter()
            .map(|a| ArticleTopSentences {
                article_id: a.clone(),
                sentences: vec![RankedSentence {
                    sentence_index: 0,
                    sentence_text: "First sentence.".into(),
                    attention_score: 1.0,
                }],
            })
            .collect(),
    }
}

pub fn pool(n: usize) -> Vec<PoolItem> {
    (0..n)
        .map(|i| {
            let truth = if i % 2 == 0 { Label::True } else { Label::Fake };
            PoolItem {
                story_id: format!("s{i:04}"),
                truth,
                model_label: if i % 5 == 0 { truth.flipped() } else { truth },
                model_confidence: 0.6 + (i % 4) as f64 * 0.1,
                article_ids: (0..1 + i % 3).map(|k| format!("s{i:04}-a{k}")).collect(),
                bundle_ref: format!("s{i:04}"),
            }
        })
        .collect()
}

pub fn deployment(assignment: Assignment) -> StudyDeployment {
    let pool = pool(200);
    let queue = curate_queue(&pool, 24, 7).unwrap();
    let stories: BTreeMap<String, StoryContent> = pool
        .iter()
        .map(|p| {
            let content = StoryContent {
                story_id: p.story_id.clone(),
                headline: format!("Headline {}", p.story_id),
                articles: p
                    .article_ids
                    .iter()
                    .map(|a| ArticleView {
                        article_id: a.clone(),
                        title: format!("Title {a}"),
                        source: "example.org".into(),
                        body: "Body text.".into(),
                    })
                    .collect(),
            };
            (p.story_id.clone(), content)
        })
        .collect();
    let bundles = pool.iter().map(|p| (p.story_id.clone(), bundle(p))).collect();
    StudyDeployment {
        study_id: STUDY.into(),
        assignment,
        queue,
        pool,
        stories,
        bundles,
    }
}

pub fn app_with(store: Arc<dyn SessionStore>) -> Router {
    let state = AppState::new(vec![deployment(Assignment::RoundRobin)], store).unwrap();
    router(Arc::new(state))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

pub async fn create(app: &Router, condition: Option<&str>) -> Value {
    let body = condition.map(|c| json!({ "condition": c }));
    let (status, v) = call(app, Method::POST, &format!("/studies/{STUDY}/sessions"), body).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v
}

/// Acknowledges instructions and answers the pre-survey.
pub async fn start(app: &Router, id: &str) {
    let (s, v) = call(app, Method::POST, &format!("/sessions/{id}/events"), Some(json!({"kind": "instructions_ack"}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let pre = json!({"stage": "pre", "expected_ai_accuracy": 70.0, "estimated_fake_rate": 40.0});
    let (s, v) = call(app, Method::POST, &format!("/sessions/{id}/survey"), Some(pre)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
}

/// Fetches the current story, answers any popup, and shares its first article.
pub async fn share_current(app: &Router, id: &str) -> Value {
    let (s, view) = call(app, Method::GET, &format!("/sessions/{id}/story"), None).await;
    assert_eq!(s, StatusCode::OK, "{view}");
    let story_id = view["story"]["story_id"].as_str().unwrap().to_string();
    if view["popup"] == json!(true) {
        let (s, v) = call(
            app,
            Method::POST,
            &format!("/sessions/{id}/popup-answer"),
            Some(json!({"story_id": story_id, "guess": "fake"})),
        )
        .await;
        assert_eq!(s, StatusCode::OK, "{v}");
    }
    let article = view["story"]["articles"][0]["article_id"].clone();
    let (s, v) = call(
        app,
        Method::POST,
        &format!("/sessions/{id}/decision"),
        Some(json!({"story_id": story_id, "action": "share", "article_ids": [article]})),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    v
}
