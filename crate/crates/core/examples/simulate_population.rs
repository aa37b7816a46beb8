//! Runs a seeded bot population on simulated time and prints the report.

use std::sync::Arc;

use epolis::clock::{IdSource, VirtualClock};
use epolis::content::Content;
use epolis::service::GameService;
use epolis::simbot::{run_population, BotPolicy, InProcess, Movement};
use epolis::store::DataDir;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let players: usize = std::env::args().nth(1).map_or(Ok(20), |s| s.parse())?;
    let dir = tempfile::tempdir()?;
    let clock = Arc::new(VirtualClock::starting_at(1_705_312_800_000));
    let service = GameService::open(
        Content::sample(),
        DataDir::new(dir.path()),
        clock.clone(),
        IdSource::seeded(7),
    )?;
    let policy = BotPolicy {
        movement: Movement::RandomWalk { wander_cells: 12 },
        ..BotPolicy::default()
    };
    let mut backend = InProcess::with_virtual_clock(&service, clock);
    let report = run_population(players, 7, &policy, "epolis-sample", &mut backend);
    println!("{}", serde_json::to_string_pretty(&report)?);
    for s in report.summaries.iter().take(3) {
        let choices: String = s.answers.iter().map(|a| format!("{}={} ", a.question, a.choice)).collect();
        println!("{} ({} moves): {choices}", epolis::simbot::bot_name(s.seed), s.moves_accepted);
    }
    Ok(())
}
