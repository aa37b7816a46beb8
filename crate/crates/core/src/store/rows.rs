use serde::{Deserialize, Serialize};

use crate::clock::Millis;
use crate::dilemma::AnswerRecord;
use crate::session::{EulerDegrees, Session};
use crate::world::{euler_to_quaternion, EulerAngles, Vec3};

/// One accepted answer, as exported for analysis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionRow {
    pub player_name: String,
    pub question_answer: String,
    pub question_number: String,
    pub question_description: String,
    pub timestamp: Millis,
    pub session_id: String,
    pub time_to_answer_ms: i64,
}

impl ActionRow {
    pub fn from_answer(session: &Session, record: &AnswerRecord) -> Self {
        Self {
            player_name: session.player_name.clone(),
            question_answer: record.choice_key.to_string(),
            question_number: record.question_number.to_string(),
            question_description: record.question_description.clone(),
            timestamp: record.answer_ts,
            session_id: session.session_id.to_string(),
            time_to_answer_ms: record.time_to_answer_ms,
        }
    }

    /// When the prompt for this answer was shown.
    pub fn prompt_ts(&self) -> Millis {
        self.timestamp - self.time_to_answer_ms
    }
}

/// One accepted movement sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementRow {
    pub player_name: String,
    pub x_axis: f64,
    pub y_axis: f64,
    pub z_axis: f64,
    pub euler_x: f64,
    pub euler_y: f64,
    pub euler_z: f64,
    pub quat_x: f64,
    pub quat_y: f64,
    pub quat_z: f64,
    pub quat_w: f64,
    pub timestamp: Millis,
    pub session_id: String,
}

impl MovementRow {
    /// Builds a row from an accepted move. The euler angles must already be
    /// validated by the session engine.
    pub fn from_move(session: &Session, position: Vec3, euler: EulerDegrees, ts: Millis) -> Self {
        let q = EulerAngles::new(euler.x, euler.y, euler.z)
            .map(euler_to_quaternion)
            .unwrap_or(crate::world::Quaternion::IDENTITY);
        Self {
            player_name: session.player_name.clone(),
            x_axis: position.x,
            y_axis: position.y,
            z_axis: position.z,
            euler_x: euler.x,
            euler_y: euler.y,
            euler_z: euler.z,
            quat_x: q.x,
            quat_y: q.y,
            quat_z: q.z,
            quat_w: q.w,
            timestamp: ts,
            session_id: session.session_id.to_string(),
        }
    }
}

/// Row of the `sessions` table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRow {
    pub session_id: String,
    pub player_name: String,
    pub avatar: String,
    pub pack_id: String,
    pub phase: String,
    pub created_ts: Millis,
}

impl From<&Session> for SessionRow {
    fn from(s: &Session) -> Self {
        Self {
            session_id: s.session_id.to_string(),
            player_name: s.player_name.clone(),
            avatar: s.avatar.clone(),
            pack_id: s.pack_id.clone(),
            phase: s.phase.label(),
            created_ts: s.created_ts,
        }
    }
}
