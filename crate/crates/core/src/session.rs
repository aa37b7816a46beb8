//! Authoritative per-session state machine.
//!
//! A session is `Roaming` until a move lands inside an unanswered trigger,
//! then `Prompted` until that exact dilemma is answered. Movement is locked
//! while prompted. After every dilemma is answered the player must reach the
//! booth cell, which moves the session to `Completed`.
//!
//! [`Session::handle_event`] validates fully before mutating, so a rejected
//! event leaves the session untouched.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::clock::Millis;
use crate::dilemma::{
    open_prompt, record_answer, AnswerRecord, ChoiceKey, CityState, DilemmaId, DilemmaPack,
};
use crate::world::{CityMap, EulerAngles, PlayerState, Vec3};

/// Server-side movement speed, world units per second.
pub const PLAYER_SPEED: f64 = 4.0;
/// Longest interval a single move may cover at [`PLAYER_SPEED`].
pub const MAX_STEP_SECONDS: f64 = 0.5;
pub const MAX_STEP_DISTANCE: f64 = PLAYER_SPEED * MAX_STEP_SECONDS;
pub const MAX_PLAYER_NAME: usize = 64;
const STEP_EPSILON: f64 = 1e-9;

/// Euler angles as carried on the wire: `x` pitch, `y` yaw, `z` roll, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerDegrees {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<EulerAngles> for EulerDegrees {
    fn from(e: EulerAngles) -> Self {
        Self {
            x: e.pitch(),
            y: e.yaw(),
            z: e.roll(),
        }
    }
}

/// Events a client may submit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientEvent {
    Move {
        position: Vec3,
        euler: EulerDegrees,
        ts: Millis,
    },
    Answer {
        question: String,
        choice: String,
        ts: Millis,
    },
    Booth {
        ts: Millis,
    },
}

impl ClientEvent {
    pub fn ts(&self) -> Millis {
        match self {
            Self::Move { ts, .. } | Self::Answer { ts, .. } | Self::Booth { ts } => *ts,
        }
    }
}

/// Every event that can appear in the log. The first three mirror
/// [`ClientEvent`]; `Prompt` and `SessionCreated` are emitted by the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    Move {
        position: Vec3,
        euler: EulerDegrees,
        ts: Millis,
    },
    Answer {
        question: String,
        choice: String,
        ts: Millis,
    },
    Booth {
        ts: Millis,
    },
    Prompt {
        question: DilemmaId,
        ts: Millis,
    },
    SessionCreated {
        ts: Millis,
        player_name: String,
        avatar: String,
        pack_id: String,
        map: String,
    },
}

impl Event {
    pub fn ts(&self) -> Millis {
        match self {
            Self::Move { ts, .. }
            | Self::Answer { ts, .. }
            | Self::Booth { ts }
            | Self::Prompt { ts, .. }
            | Self::SessionCreated { ts, .. } => *ts,
        }
    }

    pub fn as_client(&self) -> Option<ClientEvent> {
        match self.clone() {
            Self::Move { position, euler, ts } => Some(ClientEvent::Move { position, euler, ts }),
            Self::Answer { question, choice, ts } => {
                Some(ClientEvent::Answer { question, choice, ts })
            }
            Self::Booth { ts } => Some(ClientEvent::Booth { ts }),
            Self::Prompt { .. } | Self::SessionCreated { .. } => None,
        }
    }
}

impl From<ClientEvent> for Event {
    fn from(e: ClientEvent) -> Self {
        match e {
            ClientEvent::Move { position, euler, ts } => Self::Move { position, euler, ts },
            ClientEvent::Answer { question, choice, ts } => Self::Answer { question, choice, ts },
            ClientEvent::Booth { ts } => Self::Booth { ts },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Roaming,
    Prompted { question: DilemmaId, shown_ts: Millis },
    Completed { completed_ts: Millis },
}

impl Phase {
    /// Compact label used by the relational projection.
    pub fn label(&self) -> String {
        match self {
            Self::Roaming => "roaming".into(),
            Self::Prompted { question, .. } => format!("prompted:{question}"),
            Self::Completed { .. } => "completed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("player name must be 1 to {MAX_PLAYER_NAME} characters")]
    BadPlayerName,
    #[error("movement is locked until {0} is answered")]
    MoveWhilePrompted(DilemmaId),
    #[error("answer for {got} while {open} is open")]
    WrongQuestion { open: DilemmaId, got: String },
    #[error("no prompt is open for {0}")]
    AnswerWithoutPrompt(String),
    #[error("{0} was already answered")]
    DuplicateAnswer(String),
    #[error("event at {ts} precedes the previous event at {last}")]
    TimestampOrder { last: Millis, ts: Millis },
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("booth refused: {0}")]
    BoothRefused(String),
    #[error("session is already complete")]
    SessionComplete,
    #[error("choice {choice:?} is not offered by {question}")]
    BadChoice { question: DilemmaId, choice: String },
    #[error("session is not complete")]
    NotComplete,
}

impl SessionError {
    /// Stable protocol error code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::BadPlayerName => "BAD_PLAYER_NAME",
            Self::MoveWhilePrompted(_) => "MOVE_WHILE_PROMPTED",
            Self::WrongQuestion { .. } => "WRONG_QUESTION",
            Self::AnswerWithoutPrompt(_) => "ANSWER_WITHOUT_PROMPT",
            Self::DuplicateAnswer(_) => "DUPLICATE_ANSWER",
            Self::TimestampOrder { .. } => "TS_ORDER",
            Self::IllegalMove(_) => "ILLEGAL_MOVE",
            Self::BoothRefused(_) => "BOOTH_REFUSED",
            Self::SessionComplete => "SESSION_COMPLETE",
            Self::BadChoice { .. } => "BAD_CHOICE",
            Self::NotComplete => "NOT_COMPLETE",
        }
    }
}

/// Result of an accepted event.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub opened_prompt: Option<DilemmaId>,
    pub completed: bool,
    /// Set when the event was an answer.
    pub answer: Option<AnswerRecord>,
    /// Server event to log right after the accepted one.
    pub emitted: Option<Event>,
}

/// Immutable content a session runs against.
#[derive(Debug, Clone, Copy)]
pub struct Rules<'a> {
    pub pack: &'a DilemmaPack,
    pub map: &'a CityMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: Uuid,
    pub player_name: String,
    pub avatar: String,
    pub pack_id: String,
    pub map_name: String,
    pub phase: Phase,
    pub answered: Vec<AnswerRecord>,
    pub city: CityState,
    pub last_event_ts: Millis,
    pub player: PlayerState,
    pub created_ts: Millis,
    pub total: usize,
}

impl Session {
    /// Creates a roaming session at the map's first spawn cell, returning the
    /// `SessionCreated` event to log.
    pub fn create(
        session_id: Uuid,
        player_name: &str,
        avatar: &str,
        rules: Rules<'_>,
        created_ts: Millis,
    ) -> Result<(Self, Event), SessionError> {
        let len = player_name.chars().count();
        if player_name.trim().is_empty() || len > MAX_PLAYER_NAME {
            return Err(SessionError::BadPlayerName);
        }
        let position = rules
            .map
            .spawn_position()
            .expect("validated maps have a spawn");
        let session = Self {
            session_id,
            player_name: player_name.to_owned(),
            avatar: avatar.to_owned(),
            pack_id: rules.pack.pack_id().to_owned(),
            map_name: rules.map.name().to_owned(),
            phase: Phase::Roaming,
            answered: Vec::new(),
            city: CityState::new(rules.pack),
            last_event_ts: created_ts,
            player: PlayerState {
                position,
                orientation: EulerAngles::default(),
                speed: PLAYER_SPEED,
            },
            created_ts,
            total: rules.pack.len(),
        };
        let event = Event::SessionCreated {
            ts: created_ts,
            player_name: session.player_name.clone(),
            avatar: session.avatar.clone(),
            pack_id: session.pack_id.clone(),
            map: session.map_name.clone(),
        };
        Ok((session, event))
    }

    pub fn progress(&self) -> (usize, usize) {
        (self.answered.len(), self.total)
    }

    pub fn open_prompt(&self) -> Option<&DilemmaId> {
        match &self.phase {
            Phase::Prompted { question, .. } => Some(question),
            _ => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self.phase, Phase::Completed { .. })
    }

    fn has_answered(&self, id: &str) -> bool {
        self.answered.iter().any(|a| a.question_number.as_str() == id)
    }

    pub fn handle_event(
        &mut self,
        event: &ClientEvent,
        rules: Rules<'_>,
    ) -> Result<Outcome, SessionError> {
        if self.is_completed() {
            return Err(SessionError::SessionComplete);
        }
        let ts = event.ts();
        if ts < self.last_event_ts {
            return Err(SessionError::TimestampOrder {
                last: self.last_event_ts,
                ts,
            });
        }
        match (&self.phase, event) {
            (Phase::Prompted { question, .. }, ClientEvent::Move { .. }) => {
                Err(SessionError::MoveWhilePrompted(question.clone()))
            }
            (Phase::Roaming, ClientEvent::Move { position, euler, .. }) => {
                let orientation = self.check_move(*position, *euler, rules.map)?;
                self.player.position = *position;
                self.player.orientation = orientation;
                self.last_event_ts = ts;
                let mut outcome = Outcome::default();
                let answered = &self.answered;
                let opened = open_prompt(
                    rules.pack,
                    |id| answered.iter().any(|a| &a.question_number == id),
                    position.ground(),
                )
                .cloned();
                if let Some(question) = opened {
                    self.phase = Phase::Prompted {
                        question: question.clone(),
                        shown_ts: ts,
                    };
                    outcome.emitted = Some(Event::Prompt {
                        question: question.clone(),
                        ts,
                    });
                    outcome.opened_prompt = Some(question);
                }
                Ok(outcome)
            }
            (
                Phase::Prompted { question, shown_ts },
                ClientEvent::Answer {
                    question: got,
                    choice,
                    ..
                },
            ) => {
                if got != question.as_str() {
                    return Err(SessionError::WrongQuestion {
                        open: question.clone(),
                        got: got.clone(),
                    });
                }
                let spec = rules
                    .pack
                    .get(question)
                    .expect("prompted questions come from the pack");
                let bad_choice = || SessionError::BadChoice {
                    question: question.clone(),
                    choice: choice.clone(),
                };
                let key = ChoiceKey::try_from(choice.clone()).map_err(|_| bad_choice())?;
                let record = record_answer(spec, key, *shown_ts, ts).map_err(|_| bad_choice())?;
                self.city.apply(spec, key).map_err(|_| bad_choice())?;
                self.answered.push(record.clone());
                self.phase = Phase::Roaming;
                self.last_event_ts = ts;
                Ok(Outcome {
                    answer: Some(record),
                    ..Outcome::default()
                })
            }
            (Phase::Roaming, ClientEvent::Answer { question, .. }) => {
                if self.has_answered(question) {
                    Err(SessionError::DuplicateAnswer(question.clone()))
                } else {
                    Err(SessionError::AnswerWithoutPrompt(question.clone()))
                }
            }
            (Phase::Prompted { question, .. }, ClientEvent::Booth { .. }) => Err(
                SessionError::BoothRefused(format!("{question} is still open")),
            ),
            (Phase::Roaming, ClientEvent::Booth { .. }) => {
                let (done, total) = self.progress();
                if done < total {
                    return Err(SessionError::BoothRefused(format!(
                        "{done} of {total} dilemmas answered"
                    )));
                }
                let here = rules.map.cell_at(self.player.position.ground());
                if Some(here) != rules.map.booth() {
                    return Err(SessionError::BoothRefused(format!(
                        "player is at cell {here}, not the booth"
                    )));
                }
                self.phase = Phase::Completed { completed_ts: ts };
                self.last_event_ts = ts;
                Ok(Outcome {
                    completed: true,
                    ..Outcome::default()
                })
            }
            (Phase::Completed { .. }, _) => Err(SessionError::SessionComplete),
        }
    }

    fn check_move(
        &self,
        position: Vec3,
        euler: EulerDegrees,
        map: &CityMap,
    ) -> Result<EulerAngles, SessionError> {
        if !(position.x.is_finite() && position.y.is_finite() && position.z.is_finite()) {
            return Err(SessionError::IllegalMove("non-finite position".into()));
        }
        if position.y != 0.0 {
            return Err(SessionError::IllegalMove(format!(
                "y must be 0 on the ground plane, got {}",
                position.y
            )));
        }
        let orientation = EulerAngles::new(euler.x, euler.y, euler.z)
            .map_err(|e| SessionError::IllegalMove(e.to_string()))?;
        if !map.is_walkable(position.ground()) {
            return Err(SessionError::IllegalMove(format!(
                "({}, {}) is outside the map or inside a building",
                position.x, position.z
            )));
        }
        let dist = self.player.position.ground().distance(position.ground());
        if dist > MAX_STEP_DISTANCE + STEP_EPSILON {
            return Err(SessionError::IllegalMove(format!(
                "step of {dist} exceeds {MAX_STEP_DISTANCE}"
            )));
        }
        Ok(orientation)
    }

    pub fn blueprint(&self, pack: &DilemmaPack) -> Result<Blueprint, SessionError> {
        let Phase::Completed { completed_ts } = self.phase else {
            return Err(SessionError::NotComplete);
        };
        Ok(Blueprint {
            attributes: pack
                .attributes()
                .iter()
                .map(|a| {
                    let score = self.city.score(a).unwrap_or(pack.baseline().clamp(0, 100));
                    AttributeScore {
                        attribute: a.clone(),
                        score,
                        tier: Tier::for_score(score),
                    }
                })
                .collect(),
            answers: self
                .answered
                .iter()
                .map(|a| BlueprintAnswer {
                    question: a.question_number.clone(),
                    choice: a.choice_key,
                })
                .collect(),
            completed_ts,
        })
    }

    /// Hash of the full serialized state. Equal digests before and after a
    /// rejected event show it had no effect.
    pub fn state_digest(&self) -> u64 {
        let bytes = serde_json::to_vec(self).expect("session serializes");
        let mut h = DefaultHasher::new();
        bytes.hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Deteriorated,
    Neutral,
    Advanced,
}

impl Tier {
    pub const LOW: i64 = 40;
    pub const HIGH: i64 = 60;

    pub fn for_score(score: i64) -> Self {
        if score < Self::LOW {
            Self::Deteriorated
        } else if score <= Self::HIGH {
            Self::Neutral
        } else {
            Self::Advanced
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub attribute: String,
    pub score: i64,
    pub tier: Tier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlueprintAnswer {
    pub question: DilemmaId,
    pub choice: ChoiceKey,
}

/// End-of-game summary of how the answers shaped the city.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    pub attributes: Vec<AttributeScore>,
    pub answers: Vec<BlueprintAnswer>,
    pub completed_ts: Millis,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilemma::load_pack;
    use crate::world::load_map;
    use serde_json::json;

    // 8x8, cell 2. Q1 at (5,1) r=1.5, Q2 at (11,5) r=1.5, booth at cell (7,7).
    fn content() -> (CityMap, DilemmaPack) {
        let map = load_map(
            &json!({"name": "m", "cell_size": 2.0, "rows": [
                "S.......", "........", "...#....", "........",
                "........", "........", "........", ".......B"]})
            .to_string(),
        )
        .unwrap();
        let meta = json!({"module_label": "m", "behavior_label": "b",
                          "instance_frequency": "unique", "prefab_label": "p"});
        let pack = load_pack(
            &json!({"pack_id": "t", "attributes": ["safety", "trust"], "dilemmas": [
                {"id": "Q1", "description": "first", "prompt": "?", "entity_meta": meta,
                 "trigger": {"x": 5.0, "z": 1.0, "radius": 1.5},
                 "choices": [{"key": "A", "text": "a", "effects": {"safety": 8}},
                             {"key": "B", "text": "b", "effects": {"trust": -4}}]},
                {"id": "Q2", "description": "second", "prompt": "?", "entity_meta": meta,
                 "trigger": {"x": 11.0, "z": 5.0, "radius": 1.5},
                 "choices": [{"key": "A", "text": "a", "effects": {"safety": 7}},
                             {"key": "B", "text": "b"}]}]})
            .to_string(),
            Some(&map),
        )
        .unwrap();
        (map, pack)
    }

    fn mv(x: f64, z: f64, ts: Millis) -> ClientEvent {
        ClientEvent::Move {
            position: Vec3::new(x, 0.0, z),
            euler: EulerDegrees { x: 0.0, y: 90.0, z: 0.0 },
            ts,
        }
    }

    fn answer(q: &str, c: &str, ts: Millis) -> ClientEvent {
        ClientEvent::Answer {
            question: q.into(),
            choice: c.into(),
            ts,
        }
    }

    fn new_session(rules: Rules<'_>) -> Session {
        Session::create(Uuid::nil(), "maria", "avatar2", rules, 0).unwrap().0
    }

    #[test]
    fn create_validates_name_and_spawns() {
        let (map, pack) = content();
        let rules = Rules { pack: &pack, map: &map };
        let (s, ev) = Session::create(Uuid::nil(), "maria", "avatar2", rules, 5).unwrap();
        assert_eq!(s.phase, Phase::Roaming);
        assert_eq!(s.player.position, Vec3::new(1.0, 0.0, 1.0));
        assert_eq!(s.progress(), (0, 2));
        assert!(s.city.deltas().values().all(|d| *d == 0));
        assert!(matches!(ev, Event::SessionCreated { ts: 5, .. }));
        assert_eq!(
            Session::create(Uuid::nil(), "", "a", rules, 0).unwrap_err(),
            SessionError::BadPlayerName
        );
        let long = "x".repeat(65);
        assert!(Session::create(Uuid::nil(), &long, "a", rules, 0).is_err());
        assert!(Session::create(Uuid::nil(), &"é".repeat(64), "a", rules, 0).is_ok());
    }

    #[test]
    fn entering_trigger_opens_prompt_and_locks_movement() {
        let (map, pack) = content();
        let rules = Rules { pack: &pack, map: &map };
        let mut s = new_session(rules);
        assert_eq!(s.handle_event(&mv(2.5, 1.0, 100), rules).unwrap(), Outcome::default());
        let out = s.handle_event(&mv(4.0, 1.0, 200), rules).unwrap();
        assert_eq!(out.opened_prompt.as_ref().map(DilemmaId::as_str), Some("Q1"));
        assert!(matches!(out.emitted, Some(Event::Prompt { ts: 200, .. })));
        assert_eq!(s.open_prompt().map(DilemmaId::as_str), Some("Q1"));

        let before = s.clone();
        let err = s.handle_event(&mv(4.0, 1.0, 300), rules).unwrap_err();
        assert_eq!(err.code(), "MOVE_WHILE_PROMPTED");
        assert_eq!(s, before);
        assert_eq!(s.state_digest(), before.state_digest());

        assert_eq!(
            s.handle_event(&answer("Q2", "A", 300), rules).unwrap_err().code(),
            "WRONG_QUESTION"
        );
        assert_eq!(
            s.handle_event(&answer("Q1", "Z", 300), rules).unwrap_err().code(),
            "BAD_CHOICE"
        );
        let out = s.handle_event(&answer("Q1", "B", 3700), rules).unwrap();
        let rec = out.answer.unwrap();
        assert_eq!(rec.time_to_answer_ms, 3500);
        assert_eq!(s.phase, Phase::Roaming);
        assert_eq!(s.progress(), (1, 2));
        assert_eq!(s.city.delta("trust"), Some(-4));
        assert_eq!(
            s.handle_event(&answer("Q1", "A", 3800), rules).unwrap_err().code(),
            "DUPLICATE_ANSWER"
        );
        assert_eq!(
            s.handle_event(&answer("Q2", "A", 3800), rules).unwrap_err().code(),
            "ANSWER_WITHOUT_PROMPT"
        );
        // Standing in an answered zone does not reopen it.
        assert_eq!(s.handle_event(&mv(4.5, 1.0, 3900), rules).unwrap().opened_prompt, None);
    }

    #[test]
    fn move_validation() {
        let (map, pack) = content();
        let rules = Rules { pack: &pack, map: &map };
        let mut s = new_session(rules);
        let before = s.clone();
        for bad in [
            mv(3.01, 1.0, 10),
            mv(4.0, 1.0, 10),
            mv(-0.5, 1.0, 10),
            ClientEvent::Move {
                position: Vec3::new(1.5, 0.5, 1.0),
                euler: EulerDegrees { x: 0.0, y: 0.0, z: 0.0 },
                ts: 10,
            },
            ClientEvent::Move {
                position: Vec3::new(1.5, 0.0, 1.0),
                euler: EulerDegrees { x: 95.0, y: 0.0, z: 0.0 },
                ts: 10,
            },
        ] {
            assert_eq!(s.handle_event(&bad, rules).unwrap_err().code(), "ILLEGAL_MOVE", "{bad:?}");
            assert_eq!(s, before);
        }
        // Exactly the step bound is allowed.
        s.handle_event(&mv(3.0, 1.0, 10), rules).unwrap();
        assert_eq!(
            s.handle_event(&mv(3.0, 1.0, 9), rules).unwrap_err().code(),
            "TS_ORDER"
        );
        // Building at cell (3,2): x in [6,8), z in [4,6).
        s.handle_event(&mv(3.0, 3.0, 20), rules).unwrap();
        s.handle_event(&mv(5.0, 3.0, 30), rules).unwrap();
        assert_eq!(
            s.handle_event(&mv(6.2, 4.2, 40), rules).unwrap_err().code(),
            "ILLEGAL_MOVE"
        );
    }

    fn walk(s: &mut Session, rules: Rules<'_>, to: (f64, f64), ts: &mut Millis) -> Vec<Outcome> {
        let mut out = Vec::new();
        loop {
            let p = s.player.position;
            let (dx, dz) = (to.0 - p.x, to.1 - p.z);
            let d = dx.hypot(dz);
            if d < 1e-12 {
                return out;
            }
            let k = (1.0_f64).min(1.0 / d);
            *ts += 250;
            let o = s.handle_event(&mv(p.x + dx * k, p.z + dz * k, *ts), rules).unwrap();
            let opened = o.opened_prompt.is_some();
            out.push(o);
            if opened {
                return out;
            }
        }
    }

    #[test]
    fn booth_refused_with_missing_answers() {
        let (map, pack) = content();
        let rules = Rules { pack: &pack, map: &map };
        let mut s = new_session(rules);
        let mut ts = 0;
        walk(&mut s, rules, (5.0, 1.0), &mut ts);
        assert!(s.open_prompt().is_some());
        ts += 1000;
        s.handle_event(&answer("Q1", "A", ts), rules).unwrap();
        assert_eq!(
            s.blueprint(&pack).unwrap_err(),
            SessionError::NotComplete
        );
        walk(&mut s, rules, (15.0, 1.0), &mut ts);
        walk(&mut s, rules, (15.0, 15.0), &mut ts);
        assert_eq!(s.phase, Phase::Roaming);
        assert_eq!(
            s.handle_event(&ClientEvent::Booth { ts }, rules).unwrap_err().code(),
            "BOOTH_REFUSED"
        );
    }

    #[test]
    fn full_session_to_completion() {
        let (map, pack) = content();
        let rules = Rules { pack: &pack, map: &map };
        let mut s = new_session(rules);
        let mut ts = 0;
        walk(&mut s, rules, (5.0, 1.0), &mut ts);
        ts += 1000;
        s.handle_event(&answer("Q1", "A", ts), rules).unwrap();
        walk(&mut s, rules, (11.0, 1.0), &mut ts);
        walk(&mut s, rules, (11.0, 5.0), &mut ts);
        assert_eq!(s.open_prompt().map(DilemmaId::as_str), Some("Q2"));
        ts += 2000;
        s.handle_event(&answer("Q2", "A", ts), rules).unwrap();
        assert_eq!(
            s.handle_event(&ClientEvent::Booth { ts }, rules).unwrap_err().code(),
            "BOOTH_REFUSED"
        );
        walk(&mut s, rules, (15.0, 15.0), &mut ts);
        ts += 1;
        let out = s.handle_event(&ClientEvent::Booth { ts }, rules).unwrap();
        assert!(out.completed);
        assert_eq!(s.progress(), (2, 2));
        assert_eq!(
            s.handle_event(&mv(15.0, 15.0, ts + 1), rules).unwrap_err().code(),
            "SESSION_COMPLETE"
        );

        let bp = s.blueprint(&pack).unwrap();
        assert_eq!(bp.completed_ts, ts);
        assert_eq!(
            bp.attributes,
            vec![
                AttributeScore { attribute: "safety".into(), score: 65, tier: Tier::Advanced },
                AttributeScore { attribute: "trust".into(), score: 50, tier: Tier::Neutral },
            ]
        );
        let order: Vec<_> = bp.answers.iter().map(|a| a.question.as_str()).collect();
        assert_eq!(order, ["Q1", "Q2"]);
        assert_eq!(
            serde_json::to_string(&bp).unwrap(),
            serde_json::to_string(&s.blueprint(&pack).unwrap()).unwrap()
        );
    }

    #[test]
    fn tier_thresholds() {
        assert_eq!(Tier::for_score(39), Tier::Deteriorated);
        assert_eq!(Tier::for_score(40), Tier::Neutral);
        assert_eq!(Tier::for_score(60), Tier::Neutral);
        assert_eq!(Tier::for_score(61), Tier::Advanced);
    }

    #[test]
    fn wire_format() {
        let e: ClientEvent = serde_json::from_str(
            r#"{"type":"move","position":{"x":1.0,"y":0.0,"z":2.5},"euler":{"x":0,"y":90,"z":0},"ts":17}"#,
        )
        .unwrap();
        assert_eq!(e.ts(), 17);
        assert!(serde_json::from_str::<ClientEvent>(r#"{"type":"prompt","question":"Q1","ts":1}"#).is_err());
        let logged = serde_json::to_string(&Event::Booth { ts: 3 }).unwrap();
        assert_eq!(logged, r#"{"type":"booth","ts":3}"#);
        let created = serde_json::to_value(Event::SessionCreated {
            ts: 1,
            player_name: "p".into(),
            avatar: "a".into(),
            pack_id: "k".into(),
            map: "m".into(),
        })
        .unwrap();
        assert_eq!(created["type"], "session_created");
    }
}
