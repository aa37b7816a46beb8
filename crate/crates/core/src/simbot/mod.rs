//! Deterministic synthetic players.
//!
//! A bot creates a session, walks the city in fixed time steps, answers
//! every dilemma it walks into and finishes at the booth. Everything it
//! does is derived from its seed through a xoshiro256++ generator seeded
//! with SplitMix64, so two runs with the same seed send identical events.
//!
//! Bots behave like a real client: they batch moves, and when the server
//! reports that a move opened a prompt they discard the rejected tail of the
//! batch, answer, and re-plan from the last accepted position.

mod backend;

use std::collections::BTreeSet;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use uuid::Uuid;

pub use backend::{GameBackend, Http, InProcess};

use crate::clock::Millis;
use crate::dilemma::DilemmaId;
use crate::protocol::{ErrorBody, IngestResult, NewSession, PromptView, TriggerView};
use crate::session::{Blueprint, ClientEvent, EulerDegrees};
use crate::world::{Cell, CityMap, EulerAngles, Vec2};

#[derive(Debug, thiserror::Error)]
pub enum BotError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("server error {}: {}", .0.code, .0.message)]
    Server(ErrorBody),
    #[error("event {index} of a batch rejected with {code}: {message}")]
    Rejected {
        index: usize,
        code: String,
        message: String,
    },
    #[error("no walkable path from {from} to {to}")]
    NoPath { from: Cell, to: Cell },
    #[error("scripted answer {key:?} is not a choice of {question}")]
    Script { question: DilemmaId, key: String },
    #[error("server sent an unusable map: {0}")]
    BadMap(String),
    #[error("reached the center of {0} but no prompt opened")]
    MissedPrompt(DilemmaId),
    #[error("booth visit did not complete the session")]
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Movement {
    /// Visit unanswered triggers in ascending id order, then the booth.
    ShortestPath,
    /// Wander to random neighbouring cells first, then finish as
    /// [`Movement::ShortestPath`] does.
    RandomWalk { wander_cells: usize },
}

impl FromStr for Movement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shortest-path" | "shortest" => Ok(Self::ShortestPath),
            "random-walk" | "random" => Ok(Self::RandomWalk { wander_cells: 24 }),
            _ => Err(format!("unknown policy {s:?}; expected shortest-path or random-walk")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerRule {
    /// Uniform over the offered choices.
    UniformRandom,
    /// The n-th answer uses the n-th key, cycling.
    Scripted(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BotPolicy {
    pub movement: Movement,
    pub answers: AnswerRule,
    pub sample_interval_ms: Millis,
    /// Events per ingest request.
    pub batch_size: usize,
    /// Inclusive range the time-to-answer is drawn from.
    pub answer_delay_ms: (Millis, Millis),
}

impl Default for BotPolicy {
    fn default() -> Self {
        Self {
            movement: Movement::ShortestPath,
            answers: AnswerRule::UniformRandom,
            sample_interval_ms: 200,
            batch_size: 5,
            answer_delay_ms: (1500, 6000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotAnswer {
    pub question: DilemmaId,
    pub choice: String,
    pub time_to_answer_ms: Millis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotSummary {
    pub seed: u64,
    pub session_id: Uuid,
    pub events_sent: usize,
    pub moves_accepted: usize,
    pub answers: Vec<BotAnswer>,
    pub completed: bool,
    pub blueprint: Option<Blueprint>,
}

/// Player name a bot registers with.
pub fn bot_name(seed: u64) -> String {
    format!("bot-{seed:04}")
}

/// Runs one bot to completion.
pub fn run_bot(
    policy: &BotPolicy,
    seed: u64,
    pack_id: &str,
    backend: &mut dyn GameBackend,
) -> Result<BotSummary, BotError> {
    let created = backend.create_session(&NewSession {
        player_name: bot_name(seed),
        avatar: format!("avatar{}", seed % 4 + 1),
        pack_id: pack_id.to_owned(),
    })?;
    let map = CityMap::from_document(&created.map).map_err(|e| BotError::BadMap(e.to_string()))?;
    let mut triggers = created.triggers.clone();
    triggers.sort_by(|a, b| a.question.cmp(&b.question));
    let mut bot = Bot {
        policy,
        backend,
        rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        session: created.session_id,
        map,
        triggers,
        pos: created.spawn.ground(),
        ts: created.created_ts,
        pending: Vec::new(),
        answered: BTreeSet::new(),
        summary: BotSummary {
            seed,
            session_id: created.session_id,
            events_sent: 0,
            moves_accepted: 0,
            answers: Vec::new(),
            completed: false,
            blueprint: None,
        },
    };
    bot.play()?;
    Ok(bot.summary)
}

struct Bot<'a> {
    policy: &'a BotPolicy,
    backend: &'a mut dyn GameBackend,
    rng: Xoshiro256PlusPlus,
    session: Uuid,
    map: CityMap,
    triggers: Vec<TriggerView>,
    /// Position after the last generated move.
    pos: Vec2,
    /// Timestamp of the last generated event.
    ts: Millis,
    /// Unsent moves with the position and time before each one.
    pending: Vec<(ClientEvent, Vec2, Millis)>,
    answered: BTreeSet<DilemmaId>,
    summary: BotSummary,
}

impl Bot<'_> {
    fn play(&mut self) -> Result<(), BotError> {
        if let Movement::RandomWalk { wander_cells } = self.policy.movement {
            for _ in 0..wander_cells {
                let here = self.map.cell_at(self.pos);
                let options: Vec<Cell> = here
                    .neighbors4()
                    .into_iter()
                    .filter(|c| self.map.is_passable_cell(*c))
                    .collect();
                let next = options[self.rng.gen_range(0..options.len())];
                let center = self.map.cell_center(next);
                self.walk(&[center])?;
            }
        }
        while let Some(t) = self
            .triggers
            .iter()
            .find(|t| !self.answered.contains(&t.question))
            .cloned()
        {
            let target = Vec2::new(t.zone.x, t.zone.z);
            let prompted = self.travel(target)?;
            if !prompted && !self.answered.contains(&t.question) {
                // Standing on the trigger center always opens its prompt.
                return Err(BotError::MissedPrompt(t.question));
            }
        }
        loop {
            let booth = self
                .map
                .booth()
                .ok_or_else(|| BotError::BadMap("no booth".into()))?;
            if self.travel(self.map.cell_center(booth))? {
                continue;
            }
            self.ts += self.policy.sample_interval_ms;
            let r = self.send(vec![ClientEvent::Booth { ts: self.ts }])?;
            self.check(&r)?;
            if !r.completed {
                return Err(BotError::Incomplete);
            }
            self.summary.completed = true;
            break;
        }
        self.summary.blueprint = Some(self.backend.blueprint(self.session)?);
        Ok(())
    }

    /// Walks the shortest cell path to `target`. Returns true if a prompt
    /// interrupted the walk.
    fn travel(&mut self, target: Vec2) -> Result<bool, BotError> {
        let from = self.map.cell_at(self.pos);
        let to = self.map.cell_at(target);
        let path = self
            .map
            .shortest_path(from, to)
            .ok_or(BotError::NoPath { from, to })?;
        let mut waypoints: Vec<Vec2> = path
            .iter()
            .skip_while(|c| **c == from)
            .map(|c| self.map.cell_center(*c))
            .collect();
        waypoints.pop();
        waypoints.push(target);
        self.walk(&waypoints)
    }

    /// Moves through `waypoints` in straight segments of at most one sample
    /// interval each. Returns true if a prompt interrupted the walk.
    fn walk(&mut self, waypoints: &[Vec2]) -> Result<bool, BotError> {
        let step = crate::session::PLAYER_SPEED * self.policy.sample_interval_ms as f64 / 1000.0;
        for &wp in waypoints {
            while self.pos != wp {
                let d = self.pos.distance(wp);
                let next = if d <= step {
                    wp
                } else {
                    let t = step / d;
                    Vec2::new(
                        self.pos.x + (wp.x - self.pos.x) * t,
                        self.pos.z + (wp.z - self.pos.z) * t,
                    )
                };
                let yaw = (wp.x - self.pos.x).atan2(wp.z - self.pos.z).to_degrees();
                let euler: EulerDegrees = EulerAngles::wrapped(0.0, yaw, 0.0)
                    .expect("pitch 0 is in range")
                    .into();
                let before = (self.pos, self.ts);
                self.ts += self.policy.sample_interval_ms;
                self.pos = next;
                self.pending.push((
                    ClientEvent::Move {
                        position: next.with_y(0.0),
                        euler,
                        ts: self.ts,
                    },
                    before.0,
                    before.1,
                ));
                if self.pending.len() >= self.policy.batch_size && self.flush()? {
                    return Ok(true);
                }
            }
        }
        self.flush()
    }

    /// Sends buffered moves. Returns true if a prompt opened (and has now
    /// been answered).
    fn flush(&mut self) -> Result<bool, BotError> {
        if self.pending.is_empty() {
            return Ok(false);
        }
        let pending = std::mem::take(&mut self.pending);
        let events: Vec<ClientEvent> = pending.iter().map(|p| p.0.clone()).collect();
        let r = self.send(events)?;
        self.summary.moves_accepted += r.accepted;
        if let Some(i) = r.rejected_from {
            let err = r.error.clone().unwrap_or(ErrorBody {
                code: "UNKNOWN".into(),
                message: String::new(),
            });
            if err.code != "MOVE_WHILE_PROMPTED" || r.opened_prompt.is_none() {
                return Err(BotError::Rejected {
                    index: i,
                    code: err.code,
                    message: err.message,
                });
            }
            // Undo the moves the server refused.
            self.pos = pending[i].1;
            self.ts = pending[i].2;
        }
        match r.opened_prompt {
            Some(prompt) => {
                self.answer(&prompt)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    fn answer(&mut self, prompt: &PromptView) -> Result<(), BotError> {
        let (lo, hi) = self.policy.answer_delay_ms;
        let delay = self.rng.gen_range(lo..=hi);
        let key = match &self.policy.answers {
            AnswerRule::UniformRandom => {
                prompt.choices[self.rng.gen_range(0..prompt.choices.len())].key.clone()
            }
            AnswerRule::Scripted(keys) => {
                let key = keys[self.summary.answers.len() % keys.len()].clone();
                if !prompt.choices.iter().any(|c| c.key == key) {
                    return Err(BotError::Script {
                        question: prompt.question.clone(),
                        key,
                    });
                }
                key
            }
        };
        self.ts += delay;
        let r = self.send(vec![ClientEvent::Answer {
            question: prompt.question.to_string(),
            choice: key.clone(),
            ts: self.ts,
        }])?;
        self.check(&r)?;
        self.answered.insert(prompt.question.clone());
        self.summary.answers.push(BotAnswer {
            question: prompt.question.clone(),
            choice: key,
            time_to_answer_ms: delay,
        });
        Ok(())
    }

    fn send(&mut self, events: Vec<ClientEvent>) -> Result<IngestResult, BotError> {
        self.summary.events_sent += events.len();
        self.backend.ingest(self.session, &events)
    }

    fn check(&self, r: &IngestResult) -> Result<(), BotError> {
        match (&r.rejected_from, &r.error) {
            (Some(i), Some(e)) => Err(BotError::Rejected {
                index: *i,
                code: e.code.clone(),
                message: e.message.clone(),
            }),
            _ => Ok(()),
        }
    }
}

/// Aggregate of a population run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationReport {
    pub sessions: usize,
    pub completed: usize,
    pub total_actions: usize,
    pub total_movements: usize,
    pub events_sent: usize,
    pub wall_time_ms: u128,
    pub failures: Vec<BotFailure>,
    #[serde(skip)]
    pub summaries: Vec<BotSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BotFailure {
    pub seed: u64,
    pub error: String,
}

impl PopulationReport {
    fn collect(results: Vec<(u64, Result<BotSummary, BotError>)>, started: Instant) -> Self {
        let mut report = Self {
            sessions: 0,
            completed: 0,
            total_actions: 0,
            total_movements: 0,
            events_sent: 0,
            wall_time_ms: 0,
            failures: Vec::new(),
            summaries: Vec::new(),
        };
        for (seed, r) in results {
            match r {
                Ok(s) => {
                    report.sessions += 1;
                    report.completed += usize::from(s.completed);
                    report.total_actions += s.answers.len();
                    report.total_movements += s.moves_accepted;
                    report.events_sent += s.events_sent;
                    report.summaries.push(s);
                }
                Err(e) => report.failures.push(BotFailure {
                    seed,
                    error: e.to_string(),
                }),
            }
        }
        report.wall_time_ms = started.elapsed().as_millis();
        report
    }
}

/// Runs bots with seeds `base_seed..base_seed + n` one after another.
pub fn run_population(
    n: usize,
    base_seed: u64,
    policy: &BotPolicy,
    pack_id: &str,
    backend: &mut dyn GameBackend,
) -> PopulationReport {
    let started = Instant::now();
    let results = (0..n as u64)
        .map(|i| {
            let seed = base_seed + i;
            (seed, run_bot(policy, seed, pack_id, backend))
        })
        .collect();
    PopulationReport::collect(results, started)
}

/// Runs bots on separate threads, each with its own backend.
pub fn run_population_concurrent<B, F>(
    n: usize,
    base_seed: u64,
    policy: &BotPolicy,
    pack_id: &str,
    make_backend: F,
) -> PopulationReport
where
    B: GameBackend,
    F: Fn(u64) -> B + Sync,
{
    let started = Instant::now();
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n as u64)
            .map(|i| {
                let seed = base_seed + i;
                let make = &make_backend;
                scope.spawn(move || {
                    let mut backend = make(seed);
                    (seed, run_bot(policy, seed, pack_id, &mut backend))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bot thread panicked"))
            .collect()
    });
    PopulationReport::collect(results, started)
}
