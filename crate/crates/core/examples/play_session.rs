//! Plays one session by hand against an in-process service: walk into the
//! first dilemma, try to keep walking, answer, and read the state back.

use std::sync::Arc;

use epolis::clock::{IdSource, VirtualClock};
use epolis::content::Content;
use epolis::protocol::NewSession;
use epolis::service::GameService;
use epolis::session::{ClientEvent, EulerDegrees};
use epolis::store::DataDir;
use epolis::world::Vec3;

fn step(x: f64, z: f64, ts: i64) -> ClientEvent {
    ClientEvent::Move {
        position: Vec3 { x, y: 0.0, z },
        euler: EulerDegrees { x: 0.0, y: 90.0, z: 0.0 },
        ts,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let t0 = 1_705_312_800_000;
    let service = GameService::open(
        Content::sample(),
        DataDir::new(dir.path()),
        Arc::new(VirtualClock::starting_at(t0)),
        IdSource::seeded(1),
    )?;
    let created = service.create_session(&NewSession {
        player_name: "maria".into(),
        avatar: "avatar2".into(),
        pack_id: "epolis-sample".into(),
    })?;
    let id = created.session_id;
    println!("session {id} spawned at {:?}", created.spawn);

    let path = [(1.0, 3.0), (1.0, 5.0), (1.0, 7.0), (3.0, 7.0), (5.0, 7.0), (7.0, 7.0), (9.0, 7.0), (11.0, 7.0), (11.0, 8.5), (11.0, 10.0)];
    let events: Vec<ClientEvent> = path
        .iter()
        .enumerate()
        .map(|(k, &(x, z))| step(x, z, t0 + 200 * (k as i64 + 1)))
        .collect();
    let result = service.ingest(id, &events)?;
    println!(
        "sent {} moves: {} accepted, rejected from {:?} ({})",
        events.len(),
        result.accepted,
        result.rejected_from,
        result.error.as_ref().map(|e| e.code.as_str()).unwrap_or("-")
    );
    let prompt = result.opened_prompt.expect("walked into Q1");
    println!("{}: {}", prompt.question, prompt.prompt);
    for c in &prompt.choices {
        println!("  {}) {}", c.key, c.text);
    }

    let answer = ClientEvent::Answer {
        question: prompt.question.to_string(),
        choice: "B".into(),
        ts: t0 + 6_000,
    };
    service.ingest(id, &[answer])?;
    let state = service.state(id)?;
    println!(
        "phase {}, answered {}/{}",
        state.phase, state.progress.answered, state.progress.total
    );
    match service.blueprint(id) {
        Ok(_) => unreachable!(),
        Err(e) => println!("blueprint before the booth: {}", e.code()),
    }
    Ok(())
}
