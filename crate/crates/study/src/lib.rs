//! Study harness: interface conditions, curated review queues, participant
//! sessions, scripted participants and per-session measures.

pub mod condition;
pub mod log;
pub mod metrics;
pub mod pool;
pub mod queue;
pub mod session;
pub mod simulate;

pub use condition::{ExplanationKind, StudyCondition};
pub use log::{LogError, SessionLog};
pub use metrics::{build_report, MetricsError, MetricsRecord, Rate};
pub use queue::{curate_queue, extend_queue, CuratedQueue, PoolItem, QueueError, QueueItem};
pub use session::{
    Decision, EventKind, Phase, PopupQuestion, ReasonCode, Session, SessionError, SessionEvent, SessionHeader,
};
pub use simulate::{simulate_cohort, simulate_participant, Policy, SimulationConfig, SimulationError};
