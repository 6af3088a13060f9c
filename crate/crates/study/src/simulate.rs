//! Scripted participants that drive sessions through the same event path
//! as real ones.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use newsxai_core::corpus::Label;
use newsxai_core::rng;

use crate::condition::StudyCondition;
use crate::queue::{extend_queue, CuratedQueue, PoolItem, QueueError, QueueItem};
use crate::session::{
    EventKind, PostSurvey, PreSurvey, Session, SessionError, SessionEvent, SessionHeader, SurveyAnswer,
};

pub const LIKERT_ITEMS: [&str; 3] = ["trust", "reliance", "understanding"];
/// Fixed start of simulated clocks (2021-01-01T00:00:00Z).
pub const SIM_EPOCH_MS: u64 = 1_609_459_200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Shares what the assistant shows as TRUE, reports what it shows as FAKE.
    Compliant,
    Contrarian,
    /// Agrees with the displayed prediction with probability `p_agree`.
    Independent { p_agree: f64 },
}

impl std::str::FromStr for Policy {
    type Err = String;

    /// `compliant`, `contrarian`, `independent` (p = 0.5) or `independent:0.7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compliant" => Ok(Policy::Compliant),
            "contrarian" => Ok(Policy::Contrarian),
            "independent" => Ok(Policy::Independent { p_agree: 0.5 }),
            _ => {
                let p = s
                    .strip_prefix("independent:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .filter(|p| (0.0..=1.0).contains(p))
                    .ok_or_else(|| format!("unknown policy {s:?}"))?;
                Ok(Policy::Independent { p_agree: p })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub policy: Policy,
    /// Chance of skipping a story before deciding.
    pub skip_rate: f64,
    /// Chance an own-judgment decision matches the truth (baseline, or an
    /// independent simulant that left the panel closed).
    pub judgment_accuracy: f64,
    /// Chance an independent simulant opens the assistant panel.
    pub open_panel_rate: f64,
    pub tooltip_rate: f64,
    /// Chance a popup guess matches the displayed prediction.
    pub popup_accuracy: f64,
    pub perceived_accuracy_mean: f64,
    pub expected_accuracy_mean: f64,
    /// Seconds spent per story, drawn uniformly from this range.
    pub story_seconds: (f64, f64),
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            policy: Policy::Compliant,
            skip_rate: 0.0,
            judgment_accuracy: 0.6,
            open_panel_rate: 0.9,
            tooltip_rate: 0.5,
            popup_accuracy: 0.75,
            perceived_accuracy_mean: 75.0,
            expected_accuracy_mean: 70.0,
            story_seconds: (45.0, 120.0),
        }
    }
}

impl SimulationConfig {
    pub fn with_policy(policy: Policy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimulationError {
    #[error("queue exhausted after {0} items before 12 shares")]
    QueueExhausted(usize),
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error("simulant produced a rejected event: {0}")]
    Session(#[from] SessionError),
}

struct Driver<'a> {
    session: Session,
    rng: rng::Rng,
    clock: u64,
    config: &'a SimulationConfig,
}

impl Driver<'_> {
    fn emit(&mut self, after_seconds: f64, kind: EventKind) -> Result<(), SessionError> {
        self.clock += (after_seconds * 1000.0).round() as u64;
        self.session.apply(SessionEvent::new(self.clock, kind))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.random_range(lo..hi)
        } else {
            lo
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p.clamp(0.0, 1.0))
    }

    /// Roughly bell-shaped slider answer around `mean`.
    fn slider(&mut self, mean: f64) -> f64 {
        let noise: f64 = (0..3).map(|_| self.rng.random_range(-10.0..10.0)).sum();
        (mean + noise).round()
    }

    fn judged(&mut self, truth: Label) -> Label {
        if self.chance(self.config.judgment_accuracy) {
            truth
        } else {
            truth.flipped()
        }
    }

    fn review(&mut self, item: &QueueItem) -> Result<(), SessionError> {
        let id = item.story_id.clone();
        let condition = self.session.condition;
        let per_story = self.uniform(self.config.story_seconds.0, self.config.story_seconds.1);
        self.emit(1.0, EventKind::ViewStory { story_id: id.clone() })?;
        if self.session.pending_popup().is_some() {
            let guess = if self.chance(self.config.popup_accuracy) {
                item.displayed_prediction
            } else {
                item.displayed_prediction.flipped()
            };
            self.emit(5.0, EventKind::PopupAnswer { story_id: id.clone(), guess })?;
        }
        let n_open = self.rng.random_range(1..=item.article_ids.len());
        for a in &item.article_ids[..n_open] {
            self.emit(per_story * 0.2, EventKind::OpenArticle {
                story_id: id.clone(),
                article_id: a.clone(),
            })?;
        }
        let opened = match self.config.policy {
            _ if !condition.shows_prediction() => false,
            Policy::Compliant | Policy::Contrarian => true,
            Policy::Independent { .. } => self.chance(self.config.open_panel_rate),
        };
        if opened {
            self.emit(per_story * 0.1, EventKind::OpenAssistantPanel { story_id: id.clone() })?;
            for kind in condition.explanation_set() {
                if self.chance(self.config.tooltip_rate) {
                    self.emit(2.0, EventKind::HoverTooltip {
                        story_id: id.clone(),
                        element: kind.name().to_string(),
                    })?;
                }
            }
        }
        let rest = per_story * (0.8 - 0.2 * n_open as f64).max(0.1);
        if self.chance(self.config.skip_rate) {
            return self.emit(rest, EventKind::Skip { story_id: id });
        }
        let shown = item.displayed_prediction;
        let verdict = if !opened {
            self.judged(item.truth)
        } else {
            match self.config.policy {
                Policy::Compliant => shown,
                Policy::Contrarian => shown.flipped(),
                Policy::Independent { p_agree } => {
                    if self.chance(p_agree) {
                        shown
                    } else {
                        shown.flipped()
                    }
                }
            }
        };
        match verdict {
            Label::True => {
                let k = self.rng.random_range(1..=n_open);
                self.emit(rest, EventKind::Share {
                    story_id: id,
                    article_ids: item.article_ids[..k].to_vec(),
                })
            }
            Label::Fake => self.emit(rest, EventKind::Report { story_id: id }),
        }
    }
}

/// Runs one scripted participant to completion. With a pool, the queue is
/// extended a window at a time whenever it runs out; without one that is an
/// error.
pub fn simulate_participant(
    session_id: &str,
    queue: &CuratedQueue,
    condition: StudyCondition,
    config: &SimulationConfig,
    seed: u64,
    pool: Option<&[PoolItem]>,
) -> Result<Session, SimulationError> {
    let mut d = Driver {
        session: Session::new(SessionHeader {
            session_id: session_id.to_string(),
            condition,
            queue: queue.clone(),
        }),
        rng: rng::seeded(seed, &format!("simulate/{session_id}")),
        clock: SIM_EPOCH_MS,
        config,
    };
    d.emit(0.0, EventKind::InstructionsAck)?;
    let pre = PreSurvey {
        expected_ai_accuracy: d.slider(config.expected_accuracy_mean),
        estimated_fake_rate: d.slider(50.0),
        demographics: Default::default(),
    };
    let t = d.uniform(60.0, 120.0);
    d.emit(t, EventKind::SurveyAnswer {
        answer: SurveyAnswer::Pre(pre),
    })?;
    while !d.session.is_done() && d.session.phase == crate::session::Phase::Reviewing {
        if d.session.needs_extension() {
            let Some(pool) = pool else {
                return Err(SimulationError::QueueExhausted(d.session.queue.len()));
            };
            let longer = extend_queue(&d.session.queue, pool, 1)?;
            let items = longer.items[d.session.queue.len()..].to_vec();
            d.emit(0.0, EventKind::QueueExtended { items })?;
            continue;
        }
        let item = d.session.current().expect("cursor within queue").clone();
        d.review(&item)?;
    }
    let post = PostSurvey {
        perceived_accuracy: d.slider(config.perceived_accuracy_mean),
        likert: LIKERT_ITEMS
            .iter()
            .map(|k| (k.to_string(), d.rng.random_range(1..=7u8)))
            .collect(),
        free_text: Default::default(),
    };
    let t = d.uniform(60.0, 180.0);
    d.emit(t, EventKind::SurveyAnswer {
        answer: SurveyAnswer::Post(post),
    })?;
    Ok(d.session)
}

/// `n` simulants assigned round-robin over `conditions`, each with its own
/// seed derived from `seed` and its session id.
pub fn simulate_cohort(
    queue: &CuratedQueue,
    pool: Option<&[PoolItem]>,
    conditions: &[StudyCondition],
    n: usize,
    config: &SimulationConfig,
    seed: u64,
) -> Result<Vec<Session>, SimulationError> {
    (0..n)
        .map(|i| {
            let condition = conditions[i % conditions.len()];
            let id = format!("sim-{}-{i:04}", condition.slug());
            simulate_participant(&id, queue, condition, config, rng::mix(seed, &id), pool)
        })
        .collect()
}
