//! Dwell hotspots, time-to-answer and answer distribution over a simulated
//! population.

use std::sync::Arc;

use epolis::analytics;
use epolis::clock::{IdSource, VirtualClock};
use epolis::content::Content;
use epolis::service::GameService;
use epolis::simbot::{run_population, BotPolicy, InProcess};
use epolis::store::DataDir;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let clock = Arc::new(VirtualClock::starting_at(1_705_312_800_000));
    let service = GameService::open(
        Content::sample(),
        DataDir::new(tmp.path()),
        clock.clone(),
        IdSource::seeded(11),
    )?;
    let mut backend = InProcess::with_virtual_clock(&service, clock);
    run_population(30, 11, &BotPolicy::default(), "epolis-sample", &mut backend);
    let snap = service.snapshot()?;

    let grid = analytics::dwell_map(&snap.movements, 2.0)?;
    print!("{}", analytics::hotspots_csv(&analytics::hotspots(&grid, 5)));
    println!();
    let stats = analytics::question_stats(&snap.actions, &snap.movements, &service.content().pack)?;
    print!("{}", analytics::tta_csv(&stats));
    println!();
    print!("{}", analytics::distribution_csv(&analytics::answer_distribution(&snap.actions)));
    Ok(())
}
