//! Per-participant measures computed from completed sessions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use newsxai_core::corpus::Label;

use crate::condition::StudyCondition;
use crate::queue::QueueItem;
use crate::session::{EventKind, Phase, ReplayError, Session, SessionEvent, SessionHeader};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no assistant in baseline")]
    NoAssistantInBaseline,
    #[error("session {0} is not complete")]
    Incomplete(String),
    #[error("malformed event log: {0}")]
    Malformed(#[from] ReplayError),
}

/// A ratio that keeps its counts; `value` is `None` when the denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub numerator: usize,
    pub denominator: usize,
    pub value: Option<f64>,
}

impl Rate {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        Self {
            numerator,
            denominator,
            value: (denominator > 0).then(|| numerator as f64 / denominator as f64),
        }
    }
}

fn item<'a>(s: &'a Session, story_id: &str) -> &'a QueueItem {
    s.queue
        .items
        .iter()
        .find(|i| i.story_id == story_id)
        .expect("decided stories come from the queue")
}

/// Shared stories that are truly TRUE over all shared stories.
pub fn credibility(s: &Session) -> Rate {
    let true_shared = s.shared.iter().filter(|e| item(s, &e.story_id).truth == Label::True).count();
    Rate::new(true_shared, s.shared.len())
}

/// Reported stories that are truly FAKE over all reported stories.
pub fn incredibility(s: &Session) -> Rate {
    let fake_reported = s.reported.iter().filter(|id| item(s, id).truth == Label::Fake).count();
    Rate::new(fake_reported, s.reported.len())
}

/// (story, decision-implied label) for every shared or reported story.
fn decided(s: &Session) -> impl Iterator<Item = (&str, Label)> {
    s.shared
        .iter()
        .map(|e| (e.story_id.as_str(), Label::True))
        .chain(s.reported.iter().map(|id| (id.as_str(), Label::Fake)))
}

/// Decided stories that were inspected and decided as the assistant displayed.
pub fn agreement_rate(s: &Session) -> Result<Rate, MetricsError> {
    if !s.condition.shows_prediction() {
        return Err(MetricsError::NoAssistantInBaseline);
    }
    let mut n = 0;
    let mut agreed = 0;
    for (id, label) in decided(s) {
        n += 1;
        if s.inspected.contains(id) && item(s, id).displayed_prediction == label {
            agreed += 1;
        }
    }
    Ok(Rate::new(agreed, n))
}

/// Decided stories whose assistant panel was opened.
pub fn engagement_rate(s: &Session) -> Result<Rate, MetricsError> {
    if !s.condition.shows_prediction() {
        return Err(MetricsError::NoAssistantInBaseline);
    }
    let ids: Vec<&str> = decided(s).map(|(id, _)| id).collect();
    let opened = ids.iter().filter(|id| s.inspected.contains(**id)).count();
    Ok(Rate::new(opened, ids.len()))
}

/// Popup guesses that matched the displayed prediction.
pub fn prediction_task_accuracy(s: &Session) -> Rate {
    Rate::new(s.popup_answers.iter().filter(|p| p.correct()).count(), s.popup_answers.len())
}

/// Panel opens plus tooltip hovers.
pub fn click_count(events: &[SessionEvent]) -> usize {
    events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::OpenAssistantPanel { .. } | EventKind::HoverTooltip { .. }))
        .count()
}

pub fn duration_minutes(events: &[SessionEvent]) -> f64 {
    match (events.first(), events.last()) {
        (Some(a), Some(b)) => (b.timestamp_ms - a.timestamp_ms) as f64 / 60_000.0,
        _ => 0.0,
    }
}

/// One row of the metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub session_id: String,
    pub condition: StudyCondition,
    pub credibility: Rate,
    pub incredibility: Rate,
    /// Absent for baseline sessions.
    pub agreement_rate: Option<Rate>,
    pub prediction_task_accuracy: Rate,
    pub engagement_rate: Option<Rate>,
    pub perceived_accuracy: Option<f64>,
    pub expected_ai_accuracy: Option<f64>,
    pub estimated_fake_rate: Option<f64>,
    pub duration_minutes: f64,
    pub click_count: usize,
    pub shared: usize,
    pub reported: usize,
    pub skipped: usize,
}

/// Builds the metrics record of a finished session.
pub fn build_report(s: &Session) -> Result<MetricsRecord, MetricsError> {
    if s.phase != Phase::Done {
        return Err(MetricsError::Incomplete(s.session_id.clone()));
    }
    let assisted = s.condition.shows_prediction();
    Ok(MetricsRecord {
        session_id: s.session_id.clone(),
        condition: s.condition,
        credibility: credibility(s),
        incredibility: incredibility(s),
        agreement_rate: if assisted { Some(agreement_rate(s)?) } else { None },
        prediction_task_accuracy: prediction_task_accuracy(s),
        engagement_rate: if assisted { Some(engagement_rate(s)?) } else { None },
        perceived_accuracy: s.post_survey.as_ref().map(|p| p.perceived_accuracy),
        expected_ai_accuracy: s.pre_survey.as_ref().map(|p| p.expected_ai_accuracy),
        estimated_fake_rate: s.pre_survey.as_ref().map(|p| p.estimated_fake_rate),
        duration_minutes: duration_minutes(&s.events),
        click_count: click_count(&s.events),
        shared: s.shared.len(),
        reported: s.reported.len(),
        skipped: s.skipped.len(),
    })
}

/// Replays a raw log and builds its record; rejected events name their index.
pub fn report_from_log(header: SessionHeader, events: &[SessionEvent]) -> Result<MetricsRecord, MetricsError> {
    build_report(&Session::replay(header, events)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_marks_undefined() {
        assert_eq!(Rate::new(9, 12).value, Some(0.75));
        assert_eq!(Rate::new(0, 0).value, None);
    }
}
