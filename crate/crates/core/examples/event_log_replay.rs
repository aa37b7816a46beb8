//! Records a few sessions, then rebuilds everything from the event log:
//! session states, the relational projection, and recovery from a torn
//! final line.

use std::io::Write;
use std::sync::Arc;

use epolis::clock::{IdSource, VirtualClock};
use epolis::content::Content;
use epolis::service::GameService;
use epolis::simbot::{run_population, BotPolicy, InProcess};
use epolis::store::{read_log, rebuild_projection, replay, DataDir};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = DataDir::new(tmp.path());
    let clock = Arc::new(VirtualClock::starting_at(1_705_312_800_000));
    let service = GameService::open(Content::sample(), dir.clone(), clock.clone(), IdSource::seeded(3))?;
    let mut backend = InProcess::with_virtual_clock(&service, clock);
    run_population(4, 3, &BotPolicy::default(), "epolis-sample", &mut backend);
    let live = service.snapshot()?;
    let live_sessions = service.sessions();
    drop(backend);
    drop(service);

    let bytes = std::fs::read(dir.log_path())?;
    let log = read_log(&bytes)?;
    println!("{} records; first: {}", log.records.len(), bytes.split(|b| *b == b'\n').next().map(String::from_utf8_lossy).unwrap_or_default());

    let content = Content::sample();
    let replayed = replay(&log.records, content.rules())?;
    println!("sessions identical after replay: {}", replayed.sessions == live_sessions);
    println!("rows identical after replay: {}", replayed.snapshot().same_rows(&live));

    let report = rebuild_projection(&dir, content.rules())?;
    println!("rebuild: {:?}, {} rows", report.outcome, report.rows);

    std::fs::OpenOptions::new()
        .append(true)
        .open(dir.log_path())?
        .write_all(b"{\"seq\":")?;
    let report = rebuild_projection(&dir, content.rules())?;
    println!("after a torn write: {:?}, warnings {:?}", report.outcome, report.warnings);
    Ok(())
}
