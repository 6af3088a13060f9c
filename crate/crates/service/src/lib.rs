//! HTTP API hosting study sessions.
//!
//! Every state change is an event that is validated against the in-memory
//! session, appended durably to the store, and only then applied. Restarting
//! replays the stored logs, so served state always equals the replay of the
//! persisted log.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use newsxai_core::corpus::Label;
use newsxai_models::explain::ExplanationBundle;
use newsxai_stats::{analyze_study, AnalysisPlan, AnalysisReport};
use newsxai_study::metrics::build_report;
use newsxai_study::session::SurveyAnswer;
use newsxai_study::{
    extend_queue, CuratedQueue, EventKind, MetricsRecord, PoolItem, Session, SessionError, SessionEvent, SessionHeader,
    SessionLog, StudyCondition,
};

pub mod payload;
pub mod store;

use payload::{AssistantView, SessionState, StoryContent, StoryView};
use store::{SessionStore, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Assignment {
    Fixed { condition: StudyCondition },
    RoundRobin,
}

/// A study: its queue, the pool used to extend it, and the precomputed
/// stories and bundles it serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDeployment {
    pub study_id: String,
    pub assignment: Assignment,
    pub queue: CuratedQueue,
    pub pool: Vec<PoolItem>,
    pub stories: BTreeMap<String, StoryContent>,
    pub bundles: BTreeMap<String, ExplanationBundle>,
}

#[derive(Debug, thiserror::Error)]
pub enum DeployError {
    #[error("study {study}: story {story} has no {what}")]
    Missing {
        study: String,
        story: String,
        what: &'static str,
    },
    #[error("duplicate study id {0}")]
    Duplicate(String),
    #[error("stored session {session} could not be restored: {reason}")]
    Restore { session: String, reason: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl StudyDeployment {
    /// Checks that every queue and pool story can be served.
    pub fn validate(&self) -> Result<(), DeployError> {
        let refs = self
            .queue
            .items
            .iter()
            .map(|i| (&i.story_id, &i.bundle_ref))
            .chain(self.pool.iter().map(|p| (&p.story_id, &p.bundle_ref)));
        for (story, bundle) in refs {
            let missing = |what| DeployError::Missing {
                study: self.study_id.clone(),
                story: story.clone(),
                what,
            };
            if !self.stories.contains_key(story) {
                return Err(missing("story content"));
            }
            if !self.bundles.contains_key(bundle) {
                return Err(missing("explanation bundle"));
            }
        }
        Ok(())
    }
}

/// Error body: `{"reason": "ARTICLE_REQUIRED", "message": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub reason: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, reason: &str, message: impl ToString) -> Self {
        Self {
            status,
            body: ErrorBody {
                reason: reason.to_string(),
                message: message.to_string(),
            },
        }
    }

    fn unknown_study(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UNKNOWN_STUDY", format!("study {id} not found"))
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("session {id} not found"))
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use SessionError::*;
        let status = match e {
            ArticleRequired | UnknownArticle(_) | DuplicateArticle(_) | InvalidSurvey(_) | NonMonotone { .. } | BadExtension(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            NoAssistant => StatusCode::FORBIDDEN,
            _ => StatusCode::CONFLICT,
        };
        let reason = serde_json::to_value(e.reason())
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        Self::new(status, &reason, e)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!("store failure: {e}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "STORAGE", e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct Study {
    deployment: StudyDeployment,
    created: std::sync::Mutex<usize>,
}

struct Live {
    study_id: String,
    session: Session,
}

/// Shared server state.
pub struct AppState {
    studies: BTreeMap<String, Study>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Live>>>>,
    store: Arc<dyn SessionStore>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl AppState {
    /// Builds the state and restores every stored session by replay.
    pub fn new(deployments: Vec<StudyDeployment>, store: Arc<dyn SessionStore>) -> Result<Self, DeployError> {
        let mut studies = BTreeMap::new();
        for d in deployments {
            d.validate()?;
            let id = d.study_id.clone();
            let study = Study {
                deployment: d,
                created: std::sync::Mutex::new(0),
            };
            if studies.insert(id.clone(), study).is_some() {
                return Err(DeployError::Duplicate(id));
            }
        }
        let mut sessions = HashMap::new();
        for ((study_id, session_id), log) in store.load_all()? {
            let Some(study) = studies.get(&study_id) else {
                tracing::warn!("ignoring session {session_id} of unknown study {study_id}");
                continue;
            };
            let session = Session::replay(log.header, &log.events).map_err(|e| DeployError::Restore {
                session: session_id.clone(),
                reason: e.to_string(),
            })?;
            *study.created.lock().expect("counter lock") += 1;
            sessions.insert(session_id, Arc::new(Mutex::new(Live { study_id, session })));
        }
        Ok(Self {
            studies,
            sessions: RwLock::new(sessions),
            store,
        })
    }

    fn study(&self, id: &str) -> Result<&Study, ApiError> {
        self.studies.get(id).ok_or_else(|| ApiError::unknown_study(id))
    }

    async fn live(&self, session_id: &str) -> Result<Arc<Mutex<Live>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(session_id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(session_id))
    }

    pub async fn create_session(&self, study_id: &str, condition: Option<StudyCondition>) -> Result<SessionState, ApiError> {
        let study = self.study(study_id)?;
        let (session_id, condition) = {
            let mut n = study.created.lock().expect("counter lock");
            let condition = condition.unwrap_or(match study.deployment.assignment {
                Assignment::Fixed { condition } => condition,
                Assignment::RoundRobin => StudyCondition::ALL[*n % StudyCondition::ALL.len()],
            });
            let id = format!("{study_id}-{:06}", *n);
            *n += 1;
            (id, condition)
        };
        let header = SessionHeader {
            session_id: session_id.clone(),
            condition,
            queue: study.deployment.queue.clone(),
        };
        self.store.create(study_id, &header)?;
        let session = Session::new(header);
        let state = SessionState::of(study_id, &session);
        self.sessions.write().await.insert(
            session_id,
            Arc::new(Mutex::new(Live {
                study_id: study_id.to_string(),
                session,
            })),
        );
        Ok(state)
    }

    /// Validates, persists, then applies one event.
    fn commit(&self, live: &mut Live, kind: EventKind, timestamp_ms: Option<u64>) -> Result<(), ApiError> {
        let last = live.session.events.last().map_or(0, |e| e.timestamp_ms);
        let event = SessionEvent::new(timestamp_ms.unwrap_or_else(|| now_ms().max(last)), kind);
        live.session.validate(&event)?;
        self.store.append(&live.study_id, &live.session.session_id, &event)?;
        live.session.apply(event).expect("event was validated");
        Ok(())
    }

    /// Grows the queue by a window when the participant has run out of stories.
    fn ensure_story(&self, live: &mut Live) -> Result<(), ApiError> {
        if !live.session.needs_extension() {
            return Ok(());
        }
        let study = self.study(&live.study_id)?;
        let longer = extend_queue(&live.session.queue, &study.deployment.pool, 1).map_err(|e| {
            ApiError::new(StatusCode::CONFLICT, "QUEUE_EXHAUSTED", e)
        })?;
        let items = longer.items[live.session.queue.len()..].to_vec();
        self.commit(live, EventKind::QueueExtended { items }, None)
    }

    pub async fn command(&self, session_id: &str, kind: EventKind, timestamp_ms: Option<u64>) -> Result<SessionState, ApiError> {
        let live = self.live(session_id).await?;
        let mut g = live.lock().await;
        self.commit(&mut g, kind, timestamp_ms)?;
        Ok(SessionState::of(&g.study_id, &g.session))
    }

    pub async fn state(&self, session_id: &str) -> Result<SessionState, ApiError> {
        let live = self.live(session_id).await?;
        let g = live.lock().await;
        Ok(SessionState::of(&g.study_id, &g.session))
    }

    pub async fn story_view(&self, session_id: &str) -> Result<StoryView, ApiError> {
        let live = self.live(session_id).await?;
        let mut g = live.lock().await;
        if g.session.is_done() {
            return Err(SessionError::Complete.into());
        }
        if g.session.phase != newsxai_study::Phase::Reviewing {
            return Err(SessionError::WrongPhase {
                event: "get_story",
                phase: g.session.phase,
            }
            .into());
        }
        self.ensure_story(&mut g)?;
        let study = self.study(&g.study_id)?;
        let item = g.session.current().expect("story available after extension");
        let story = study.deployment.stories[&item.story_id].clone();
        let bundle = &study.deployment.bundles[&item.bundle_ref];
        Ok(StoryView::build(&g.session, item, story, bundle))
    }

    /// The assistant panel for the current story, gated by condition and popup.
    pub async fn assistant(&self, session_id: &str) -> Result<AssistantView, ApiError> {
        let view = self.story_view(session_id).await?;
        if !view.condition.shows_prediction() {
            return Err(SessionError::NoAssistant.into());
        }
        if view.popup {
            return Err(SessionError::PopupPending(view.story.story_id).into());
        }
        Ok(view.assistant.expect("assisted condition without popup"))
    }

    pub async fn log(&self, session_id: &str) -> Result<SessionLog, ApiError> {
        let live = self.live(session_id).await?;
        let g = live.lock().await;
        Ok(self.store.load(&g.study_id, session_id)?)
    }

    /// Whether the persisted log replays to the served state.
    pub async fn consistency(&self, session_id: &str) -> Result<Consistency, ApiError> {
        let live = self.live(session_id).await?;
        let g = live.lock().await;
        let log = self.store.load(&g.study_id, session_id)?;
        let replayed = Session::replay(log.header, &log.events);
        Ok(Consistency {
            session_id: session_id.to_string(),
            events: log.events.len(),
            consistent: replayed.as_ref().is_ok_and(|s| *s == g.session),
        })
    }

    async fn sessions_of(&self) -> Vec<Arc<Mutex<Live>>> {
        self.sessions.read().await.values().cloned().collect()
    }

    /// Metrics of every completed session in a study, by session id.
    pub async fn metrics(&self, study_id: &str) -> Result<Vec<MetricsRecord>, ApiError> {
        self.study(study_id)?;
        let mut out = Vec::new();
        for live in self.sessions_of().await {
            let g = live.lock().await;
            if g.study_id == study_id && g.session.is_done() {
                out.push(build_report(&g.session).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "METRICS", e))?);
            }
        }
        out.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        Ok(out)
    }

    pub async fn analysis(&self, study_id: &str, min_duration: Option<f64>) -> Result<AnalysisReport, ApiError> {
        let records = self.metrics(study_id).await?;
        let mut plan = AnalysisPlan::default();
        if let Some(m) = min_duration {
            plan.min_duration_minutes = m;
        }
        Ok(analyze_study(&records, &plan))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub session_id: String,
    pub events: usize,
    pub consistent: bool,
}

#[derive(Debug, Default, Deserialize)]
struct CreateBody {
    condition: Option<String>,
}

#[derive(Debug, Deserialize)]
struct InteractionBody {
    timestamp_ms: Option<u64>,
    #[serde(flatten)]
    kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Action {
    Share,
    Report,
    Skip,
}

#[derive(Debug, Deserialize)]
struct DecisionBody {
    story_id: String,
    action: Action,
    #[serde(default)]
    article_ids: Vec<String>,
    timestamp_ms: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct PopupBody {
    story_id: String,
    guess: Label,
    timestamp_ms: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct SurveyBody {
    timestamp_ms: Option<u64>,
    #[serde(flatten)]
    answer: SurveyAnswer,
}

#[derive(Debug, Deserialize)]
struct AnalysisQuery {
    min_duration: Option<f64>,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::bad_request)
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Path(study_id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionState>), ApiError> {
    let req: CreateBody = if body.iter().all(u8::is_ascii_whitespace) { CreateBody::default() } else { parse(&body)? };
    let condition = req
        .condition
        .map(|c| c.parse::<StudyCondition>().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "UNKNOWN_CONDITION", e)))
        .transpose()?;
    let state = app.create_session(&study_id, condition).await?;
    Ok((StatusCode::CREATED, Json(state)))
}

async fn get_state(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionState> {
    app.state(&id).await.map(Json)
}

async fn get_story(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StoryView> {
    app.story_view(&id).await.map(Json)
}

async fn get_assistant(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<AssistantView> {
    app.assistant(&id).await.map(Json)
}

async fn post_event(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<SessionState> {
    let req: InteractionBody = parse(&body)?;
    match req.kind {
        EventKind::InstructionsAck
        | EventKind::ViewStory { .. }
        | EventKind::OpenArticle { .. }
        | EventKind::OpenAssistantPanel { .. }
        | EventKind::HoverTooltip { .. } => {}
        other => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "WRONG_ENDPOINT",
                format!("{} events are not accepted here", other.name()),
            ))
        }
    }
    app.command(&id, req.kind, req.timestamp_ms).await.map(Json)
}

async fn post_decision(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<SessionState> {
    let req: DecisionBody = parse(&body)?;
    let kind = match req.action {
        Action::Share => EventKind::Share {
            story_id: req.story_id,
            article_ids: req.article_ids,
        },
        Action::Report => EventKind::Report { story_id: req.story_id },
        Action::Skip => EventKind::Skip { story_id: req.story_id },
    };
    app.command(&id, kind, req.timestamp_ms).await.map(Json)
}

async fn post_popup(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<SessionState> {
    let req: PopupBody = parse(&body)?;
    let kind = EventKind::PopupAnswer {
        story_id: req.story_id,
        guess: req.guess,
    };
    app.command(&id, kind, req.timestamp_ms).await.map(Json)
}

async fn post_survey(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<SessionState> {
    let req: SurveyBody = parse(&body)?;
    app.command(&id, EventKind::SurveyAnswer { answer: req.answer }, req.timestamp_ms).await.map(Json)
}

async fn get_log(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionLog> {
    app.log(&id).await.map(Json)
}

async fn get_consistency(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Consistency> {
    app.consistency(&id).await.map(Json)
}

async fn get_metrics(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<MetricsRecord>> {
    app.metrics(&id).await.map(Json)
}

async fn get_analysis(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<AnalysisQuery>,
) -> ApiResult<AnalysisReport> {
    app.analysis(&id, q.min_duration).await.map(Json)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/studies/{id}/sessions", post(create_session))
        .route("/studies/{id}/metrics", get(get_metrics))
        .route("/studies/{id}/analysis", get(get_analysis))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/story", get(get_story))
        .route("/sessions/{id}/assistant", get(get_assistant))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/decision", post(post_decision))
        .route("/sessions/{id}/popup-answer", post(post_popup))
        .route("/sessions/{id}/survey", post(post_survey))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/consistency", get(get_consistency))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
