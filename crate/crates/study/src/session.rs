//! Event-sourced participant sessions.
//!
//! A session is a header (id, condition, initial queue) plus an append-only
//! list of events. Every state change goes through [`Session::apply`], so
//! replaying the stored events onto a fresh session reproduces it exactly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use newsxai_core::corpus::Label;

use crate::condition::StudyCondition;
use crate::queue::{CuratedQueue, QueueItem};

pub const REQUIRED_SHARES: usize = 12;
/// Share counts at which a prediction popup is asked, once per level.
pub const POPUP_SHARE_LEVELS: std::ops::RangeInclusive<usize> = 8..=11;
pub const LIKERT_MAX: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Instructions,
    PreSurvey,
    Reviewing,
    PostSurvey,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreSurvey {
    pub expected_ai_accuracy: f64,
    pub estimated_fake_rate: f64,
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSurvey {
    pub perceived_accuracy: f64,
    #[serde(default)]
    pub likert: BTreeMap<String, u8>,
    #[serde(default)]
    pub free_text: BTreeMap<String, String>,
}

fn clamp_slider(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 100.0)
    }
}

impl PreSurvey {
    pub fn clamped(mut self) -> Self {
        self.expected_ai_accuracy = clamp_slider(self.expected_ai_accuracy);
        self.estimated_fake_rate = clamp_slider(self.estimated_fake_rate);
        self
    }
}

impl PostSurvey {
    pub fn clamped(mut self) -> Self {
        self.perceived_accuracy = clamp_slider(self.perceived_accuracy);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum SurveyAnswer {
    Pre(PreSurvey),
    Post(PostSurvey),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Participant finished reading the instructions.
    InstructionsAck,
    ViewStory { story_id: String },
    OpenArticle { story_id: String, article_id: String },
    OpenAssistantPanel { story_id: String },
    HoverTooltip { story_id: String, element: String },
    Share { story_id: String, article_ids: Vec<String> },
    Report { story_id: String },
    Skip { story_id: String },
    PopupAnswer { story_id: String, guess: Label },
    SurveyAnswer { answer: SurveyAnswer },
    /// Items appended when skips exhausted the queue.
    QueueExtended { items: Vec<QueueItem> },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::InstructionsAck => "instructions_ack",
            EventKind::ViewStory { .. } => "view_story",
            EventKind::OpenArticle { .. } => "open_article",
            EventKind::OpenAssistantPanel { .. } => "open_assistant_panel",
            EventKind::HoverTooltip { .. } => "hover_tooltip",
            EventKind::Share { .. } => "share",
            EventKind::Report { .. } => "report",
            EventKind::Skip { .. } => "skip",
            EventKind::PopupAnswer { .. } => "popup_answer",
            EventKind::SurveyAnswer { .. } => "survey_answer",
            EventKind::QueueExtended { .. } => "queue_extended",
        }
    }

    pub fn story_id(&self) -> Option<&str> {
        match self {
            EventKind::ViewStory { story_id }
            | EventKind::OpenArticle { story_id, .. }
            | EventKind::OpenAssistantPanel { story_id }
            | EventKind::HoverTooltip { story_id, .. }
            | EventKind::Share { story_id, .. }
            | EventKind::Report { story_id }
            | EventKind::Skip { story_id }
            | EventKind::PopupAnswer { story_id, .. } => Some(story_id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Milliseconds since an arbitrary epoch; non-decreasing per session.
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl SessionEvent {
    pub fn new(timestamp_ms: u64, kind: EventKind) -> Self {
        Self { timestamp_ms, kind }
    }
}

/// Machine-readable rejection reasons, stable for clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    WrongPhase,
    SessionComplete,
    WrongStory,
    AlreadyDecided,
    ArticleRequired,
    UnknownArticle,
    DuplicateArticle,
    PopupPending,
    NoPopup,
    NoAssistant,
    QueueExhausted,
    NonMonotoneTimestamp,
    InvalidSurvey,
    BadExtension,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SessionError {
    #[error("event {event} not allowed in phase {phase:?}")]
    WrongPhase { event: &'static str, phase: Phase },
    #[error("session is complete")]
    Complete,
    #[error("story {got} is not the current story {expected:?}")]
    WrongStory { got: String, expected: Option<String> },
    #[error("story {0} was already decided")]
    AlreadyDecided(String),
    #[error("article selection required")]
    ArticleRequired,
    #[error("article {0} does not belong to the current story")]
    UnknownArticle(String),
    #[error("article {0} selected twice")]
    DuplicateArticle(String),
    #[error("the prediction popup for story {0} must be answered first")]
    PopupPending(String),
    #[error("no popup is pending for story {0}")]
    NoPopup(String),
    #[error("no assistant in baseline")]
    NoAssistant,
    #[error("queue exhausted after {0} items")]
    QueueExhausted(usize),
    #[error("timestamp {got} precedes previous event at {previous}")]
    NonMonotone { previous: u64, got: u64 },
    #[error("invalid survey answer: {0}")]
    InvalidSurvey(String),
    #[error("queue extension must continue at position {0}")]
    BadExtension(usize),
}

impl SessionError {
    pub fn reason(&self) -> ReasonCode {
        match self {
            SessionError::WrongPhase { .. } => ReasonCode::WrongPhase,
            SessionError::Complete => ReasonCode::SessionComplete,
            SessionError::WrongStory { .. } => ReasonCode::WrongStory,
            SessionError::AlreadyDecided(_) => ReasonCode::AlreadyDecided,
            SessionError::ArticleRequired => ReasonCode::ArticleRequired,
            SessionError::UnknownArticle(_) => ReasonCode::UnknownArticle,
            SessionError::DuplicateArticle(_) => ReasonCode::DuplicateArticle,
            SessionError::PopupPending(_) => ReasonCode::PopupPending,
            SessionError::NoPopup(_) => ReasonCode::NoPopup,
            SessionError::NoAssistant => ReasonCode::NoAssistant,
            SessionError::QueueExhausted(_) => ReasonCode::QueueExhausted,
            SessionError::NonMonotone { .. } => ReasonCode::NonMonotoneTimestamp,
            SessionError::InvalidSurvey(_) => ReasonCode::InvalidSurvey,
            SessionError::BadExtension(_) => ReasonCode::BadExtension,
        }
    }
}

/// What a participant did with one story.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Share,
    Report,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedEntry {
    pub story_id: String,
    pub article_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopupRecord {
    pub story_id: String,
    pub share_level: usize,
    pub guess: Label,
    pub displayed: Label,
}

impl PopupRecord {
    pub fn correct(&self) -> bool {
        self.guess == self.displayed
    }
}

/// A popup the participant must answer before continuing with the story.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopupQuestion {
    pub story_id: String,
    pub share_level: usize,
}

/// Everything needed to rebuild a session besides its events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub condition: StudyCondition,
    pub queue: CuratedQueue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub condition: StudyCondition,
    pub queue: CuratedQueue,
    pub cursor: usize,
    pub phase: Phase,
    pub shared: Vec<SharedEntry>,
    pub reported: Vec<String>,
    pub skipped: Vec<String>,
    pub popup_answers: Vec<PopupRecord>,
    /// Stories whose assistant panel was opened at least once.
    pub inspected: BTreeSet<String>,
    pub pre_survey: Option<PreSurvey>,
    pub post_survey: Option<PostSurvey>,
    pub events: Vec<SessionEvent>,
}

/// Failure to rebuild a session from a log, naming the offending record.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("event {index} ({kind}) rejected: {source}")]
pub struct ReplayError {
    pub index: usize,
    pub kind: &'static str,
    #[source]
    pub source: SessionError,
}

impl Session {
    pub fn new(header: SessionHeader) -> Self {
        Self {
            session_id: header.session_id,
            condition: header.condition,
            queue: header.queue,
            cursor: 0,
            phase: Phase::Instructions,
            shared: Vec::new(),
            reported: Vec::new(),
            skipped: Vec::new(),
            popup_answers: Vec::new(),
            inspected: BTreeSet::new(),
            pre_survey: None,
            post_survey: None,
            events: Vec::new(),
        }
    }

    /// Applies `events` in order to a fresh session built from `header`.
    pub fn replay(header: SessionHeader, events: &[SessionEvent]) -> Result<Self, ReplayError> {
        let mut s = Self::new(header);
        for (index, e) in events.iter().enumerate() {
            s.apply(e.clone()).map_err(|source| ReplayError {
                index,
                kind: e.kind.name(),
                source,
            })?;
        }
        Ok(s)
    }

    /// The session's initial header; with `events` it fully determines the state.
    pub fn header(&self) -> SessionHeader {
        let extended: usize = self
            .events
            .iter()
            .map(|e| match &e.kind {
                EventKind::QueueExtended { items } => items.len(),
                _ => 0,
            })
            .sum();
        let mut queue = self.queue.clone();
        queue.items.truncate(queue.items.len() - extended);
        SessionHeader {
            session_id: self.session_id.clone(),
            condition: self.condition,
            queue,
        }
    }

    pub fn current(&self) -> Option<&QueueItem> {
        if self.phase == Phase::Reviewing {
            self.queue.get(self.cursor)
        } else {
            None
        }
    }

    pub fn share_count(&self) -> usize {
        self.shared.len()
    }

    pub fn decided_count(&self) -> usize {
        self.shared.len() + self.reported.len()
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// True when reviewing has run out of queue before the required shares.
    pub fn needs_extension(&self) -> bool {
        self.phase == Phase::Reviewing && self.cursor >= self.queue.len()
    }

    fn popup_asked_at(&self, level: usize) -> bool {
        self.popup_answers.iter().any(|p| p.share_level == level)
    }

    /// The popup due for the current story, if any. One popup is asked per
    /// share level 8..=11, on the first story presented at that level.
    pub fn pending_popup(&self) -> Option<PopupQuestion> {
        let item = self.current()?;
        let level = self.share_count();
        if !self.condition.shows_prediction() || !POPUP_SHARE_LEVELS.contains(&level) || self.popup_asked_at(level) {
            return None;
        }
        Some(PopupQuestion {
            story_id: item.story_id.clone(),
            share_level: level,
        })
    }

    /// Decision taken on a story, if any.
    pub fn decision(&self, story_id: &str) -> Option<Decision> {
        if self.shared.iter().any(|s| s.story_id == story_id) {
            Some(Decision::Share)
        } else if self.reported.iter().any(|s| s == story_id) {
            Some(Decision::Report)
        } else if self.skipped.iter().any(|s| s == story_id) {
            Some(Decision::Skip)
        } else {
            None
        }
    }

    fn require_phase(&self, event: &'static str, phase: Phase) -> Result<(), SessionError> {
        if self.phase == Phase::Done {
            return Err(SessionError::Complete);
        }
        if self.phase != phase {
            return Err(SessionError::WrongPhase {
                event,
                phase: self.phase,
            });
        }
        Ok(())
    }

    fn require_current(&self, event: &'static str, story_id: &str) -> Result<&QueueItem, SessionError> {
        self.require_phase(event, Phase::Reviewing)?;
        if self.decision(story_id).is_some() {
            return Err(SessionError::AlreadyDecided(story_id.to_string()));
        }
        let Some(item) = self.queue.get(self.cursor) else {
            return Err(SessionError::QueueExhausted(self.queue.len()));
        };
        if item.story_id != story_id {
            return Err(SessionError::WrongStory {
                got: story_id.to_string(),
                expected: Some(item.story_id.clone()),
            });
        }
        Ok(item)
    }

    fn require_no_popup(&self) -> Result<(), SessionError> {
        match self.pending_popup() {
            Some(p) => Err(SessionError::PopupPending(p.story_id)),
            None => Ok(()),
        }
    }

    /// Checks `event` against the current state without changing anything.
    pub fn validate(&self, event: &SessionEvent) -> Result<(), SessionError> {
        if let Some(last) = self.events.last() {
            if event.timestamp_ms < last.timestamp_ms {
                return Err(SessionError::NonMonotone {
                    previous: last.timestamp_ms,
                    got: event.timestamp_ms,
                });
            }
        }
        let name = event.kind.name();
        match &event.kind {
            EventKind::InstructionsAck => self.require_phase(name, Phase::Instructions),
            EventKind::ViewStory { story_id } => self.require_current(name, story_id).map(|_| ()),
            EventKind::OpenArticle { story_id, article_id } => {
                let item = self.require_current(name, story_id)?;
                if !item.article_ids.contains(article_id) {
                    return Err(SessionError::UnknownArticle(article_id.clone()));
                }
                Ok(())
            }
            EventKind::OpenAssistantPanel { story_id } | EventKind::HoverTooltip { story_id, .. } => {
                self.require_current(name, story_id)?;
                if !self.condition.shows_prediction() {
                    return Err(SessionError::NoAssistant);
                }
                self.require_no_popup()
            }
            EventKind::Share { story_id, article_ids } => {
                let item = self.require_current(name, story_id)?;
                if article_ids.is_empty() {
                    return Err(SessionError::ArticleRequired);
                }
                let mut seen = BTreeSet::new();
                for a in article_ids {
                    if !item.article_ids.contains(a) {
                        return Err(SessionError::UnknownArticle(a.clone()));
                    }
                    if !seen.insert(a) {
                        return Err(SessionError::DuplicateArticle(a.clone()));
                    }
                }
                self.require_no_popup()
            }
            EventKind::Report { story_id } | EventKind::Skip { story_id } => {
                self.require_current(name, story_id)?;
                self.require_no_popup()
            }
            EventKind::PopupAnswer { story_id, .. } => {
                self.require_current(name, story_id)?;
                match self.pending_popup() {
                    Some(p) if &p.story_id == story_id => Ok(()),
                    _ => Err(SessionError::NoPopup(story_id.clone())),
                }
            }
            EventKind::SurveyAnswer { answer } => match answer {
                SurveyAnswer::Pre(_) => self.require_phase(name, Phase::PreSurvey),
                SurveyAnswer::Post(post) => {
                    self.require_phase(name, Phase::PostSurvey)?;
                    if let Some((k, v)) = post.likert.iter().find(|(_, &v)| v == 0 || v > LIKERT_MAX) {
                        return Err(SessionError::InvalidSurvey(format!("likert item {k} = {v} outside 1..={LIKERT_MAX}")));
                    }
                    Ok(())
                }
            },
            EventKind::QueueExtended { items } => {
                self.require_phase(name, Phase::Reviewing)?;
                let next = self.queue.len() + 1;
                let contiguous = items.iter().enumerate().all(|(k, it)| it.position == next + k);
                let fresh = items
                    .iter()
                    .all(|it| !self.queue.items.iter().any(|q| q.story_id == it.story_id));
                if items.is_empty() || !contiguous || !fresh {
                    return Err(SessionError::BadExtension(next));
                }
                Ok(())
            }
        }
    }

    /// Validates and applies one event, appending it to the log.
    pub fn apply(&mut self, event: SessionEvent) -> Result<(), SessionError> {
        self.validate(&event)?;
        match &event.kind {
            EventKind::InstructionsAck => self.phase = Phase::PreSurvey,
            EventKind::ViewStory { .. } | EventKind::OpenArticle { .. } | EventKind::HoverTooltip { .. } => {}
            EventKind::OpenAssistantPanel { story_id } => {
                self.inspected.insert(story_id.clone());
            }
            EventKind::Share { story_id, article_ids } => {
                self.shared.push(SharedEntry {
                    story_id: story_id.clone(),
                    article_ids: article_ids.clone(),
                });
                self.cursor += 1;
                if self.shared.len() >= REQUIRED_SHARES {
                    self.phase = Phase::PostSurvey;
                }
            }
            EventKind::Report { story_id } => {
                self.reported.push(story_id.clone());
                self.cursor += 1;
            }
            EventKind::Skip { story_id } => {
                self.skipped.push(story_id.clone());
                self.cursor += 1;
            }
            EventKind::PopupAnswer { story_id, guess } => {
                let displayed = self.queue.items[self.cursor].displayed_prediction;
                self.popup_answers.push(PopupRecord {
                    story_id: story_id.clone(),
                    share_level: self.share_count(),
                    guess: *guess,
                    displayed,
                });
            }
            EventKind::SurveyAnswer { answer } => match answer {
                SurveyAnswer::Pre(pre) => {
                    self.pre_survey = Some(pre.clone().clamped());
                    self.phase = Phase::Reviewing;
                }
                SurveyAnswer::Post(post) => {
                    self.post_survey = Some(post.clone().clamped());
                    self.phase = Phase::Done;
                }
            },
            EventKind::QueueExtended { items } => self.queue.items.extend(items.iter().cloned()),
        }
        self.events.push(event);
        Ok(())
    }
}
