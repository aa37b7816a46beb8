//! Dilemma packs, prompt selection, answer records and the city-state
//! accumulator.
//!
//! There is deliberately no notion of a correct answer anywhere in this
//! module: a choice only carries text and attribute deltas.

mod pack;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::Millis;
use crate::world::{in_trigger, Vec2};

pub use pack::{
    load_pack, Choice, ChoiceDocument, ChoiceKey, DilemmaDocument, DilemmaId, DilemmaPack,
    DilemmaSpec, EntityMeta, InstanceFrequency, PackDocument, PackError, PackIssue,
    DEFAULT_BASELINE, MAX_ATTRIBUTES, MAX_CHOICES, MAX_EFFECT, MIN_CHOICES, MAX_TRIGGER_CELLS,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnswerError {
    #[error("choice {key} is not offered by {question}")]
    BadChoice { question: DilemmaId, key: ChoiceKey },
    #[error("answer at {answer_ts} precedes prompt at {prompt_ts}")]
    TimestampOrder { prompt_ts: Millis, answer_ts: Millis },
}

/// Immutable record of one answered dilemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_number: DilemmaId,
    pub question_description: String,
    pub choice_key: ChoiceKey,
    pub answer_ts: Millis,
    pub time_to_answer_ms: i64,
}

/// Nearest unanswered dilemma whose trigger contains `position`; equal
/// distances resolve to the lowest id.
pub fn open_prompt(
    pack: &DilemmaPack,
    is_answered: impl Fn(&DilemmaId) -> bool,
    position: Vec2,
) -> Option<&DilemmaId> {
    pack.dilemmas()
        .iter()
        .filter(|d| !is_answered(&d.id) && in_trigger(position, &d.trigger))
        .map(|d| (position.distance(d.trigger.center()), &d.id))
        .min_by(|(da, ia), (db, ib)| da.total_cmp(db).then_with(|| ia.cmp(ib)))
        .map(|(_, id)| id)
}

pub fn record_answer(
    spec: &DilemmaSpec,
    choice_key: ChoiceKey,
    prompt_ts: Millis,
    answer_ts: Millis,
) -> Result<AnswerRecord, AnswerError> {
    if spec.choice(choice_key).is_none() {
        return Err(AnswerError::BadChoice {
            question: spec.id.clone(),
            key: choice_key,
        });
    }
    if answer_ts < prompt_ts {
        return Err(AnswerError::TimestampOrder {
            prompt_ts,
            answer_ts,
        });
    }
    Ok(AnswerRecord {
        question_number: spec.id.clone(),
        question_description: spec.description.clone(),
        choice_key,
        answer_ts,
        time_to_answer_ms: answer_ts - prompt_ts,
    })
}

/// Per-attribute accumulated deltas. Accumulation is unclamped; only
/// [`CityState::score`] clamps, which makes the final state independent of
/// answer order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityState {
    baseline: i64,
    deltas: BTreeMap<String, i64>,
}

impl CityState {
    pub fn new(pack: &DilemmaPack) -> Self {
        Self {
            baseline: pack.baseline(),
            deltas: pack.attributes().iter().map(|a| (a.clone(), 0)).collect(),
        }
    }

    pub fn deltas(&self) -> &BTreeMap<String, i64> {
        &self.deltas
    }

    pub fn delta(&self, attribute: &str) -> Option<i64> {
        self.deltas.get(attribute).copied()
    }

    /// `clamp(baseline + delta, 0, 100)`.
    pub fn score(&self, attribute: &str) -> Option<i64> {
        self.delta(attribute)
            .map(|d| self.baseline.saturating_add(d).clamp(0, 100))
    }

    pub fn apply(&mut self, spec: &DilemmaSpec, choice_key: ChoiceKey) -> Result<(), AnswerError> {
        let choice = spec.choice(choice_key).ok_or_else(|| AnswerError::BadChoice {
            question: spec.id.clone(),
            key: choice_key,
        })?;
        for (attr, delta) in &choice.effects {
            if let Some(acc) = self.deltas.get_mut(attr) {
                *acc += delta;
            }
        }
        Ok(())
    }
}

pub fn apply_effects(
    state: &CityState,
    spec: &DilemmaSpec,
    choice_key: ChoiceKey,
) -> Result<CityState, AnswerError> {
    let mut next = state.clone();
    next.apply(spec, choice_key)?;
    Ok(next)
}
