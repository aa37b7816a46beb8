//! Request and response bodies of the HTTP protocol. The in-process service
//! returns the same types, so both transports behave identically.

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::clock::Millis;
use crate::dilemma::{DilemmaId, DilemmaSpec};
use crate::session::{ClientEvent, EulerDegrees, Phase, Session};
use crate::world::{MapDocument, TriggerZone, Vec3};

/// Largest accepted ingest batch.
pub const MAX_BATCH: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    pub player_name: String,
    pub avatar: String,
    pub pack_id: String,
}

/// Where a dilemma can be encountered. Carries no choice data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerView {
    pub question: DilemmaId,
    #[serde(flatten)]
    pub zone: TriggerZone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: Uuid,
    pub map: MapDocument,
    pub dilemma_count: usize,
    pub spawn: Vec3,
    pub speed: f64,
    /// Server time the session started; the first event must not precede it.
    pub created_ts: Millis,
    pub triggers: Vec<TriggerView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestBatch {
    pub events: Vec<ClientEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceView {
    pub key: String,
    pub text: String,
}

/// An open dilemma as shown to the player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptView {
    pub question: DilemmaId,
    pub prompt: String,
    pub choices: Vec<ChoiceView>,
}

impl From<&DilemmaSpec> for PromptView {
    fn from(d: &DilemmaSpec) -> Self {
        Self {
            question: d.id.clone(),
            prompt: d.prompt.clone(),
            choices: d
                .choices
                .iter()
                .map(|c| ChoiceView {
                    key: c.key.to_string(),
                    text: c.text.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestResult {
    pub accepted: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opened_prompt: Option<PromptView>,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected_from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub answered: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStateView {
    pub phase: String,
    pub progress: Progress,
    pub position: Vec3,
    pub euler: EulerDegrees,
    pub last_event_ts: Millis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_prompt: Option<PromptView>,
}

impl SessionStateView {
    pub fn of(session: &Session, prompt: Option<&DilemmaSpec>) -> Self {
        let (answered, total) = session.progress();
        let phase = match session.phase {
            Phase::Roaming => "roaming",
            Phase::Prompted { .. } => "prompted",
            Phase::Completed { .. } => "completed",
        };
        Self {
            phase: phase.into(),
            progress: Progress { answered, total },
            position: session.player.position,
            euler: session.player.orientation.into(),
            last_event_ts: session.last_event_ts,
            open_prompt: prompt.map(PromptView::from),
        }
    }
}
