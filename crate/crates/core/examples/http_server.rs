//! Serves the HTTP API on an ephemeral port, plays one bot through it, and
//! fetches the export while the server is still up.

use std::sync::Arc;

use epolis::clock::{IdSource, SystemClock};
use epolis::content::Content;
use epolis::service::GameService;
use epolis::simbot::{run_bot, BotPolicy, Http};
use epolis::store::DataDir;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let service = Arc::new(GameService::open(
        Content::sample(),
        DataDir::new(tmp.path()),
        Arc::new(SystemClock),
        IdSource::Random,
    )?);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(epolis::api::serve(listener, service, async {
        let _ = stopped.await;
    }));
    println!("serving on {base}");

    // The bot client blocks, so it runs off the async workers.
    let url = base.clone();
    let summary = tokio::task::spawn_blocking(move || {
        run_bot(&BotPolicy::default(), 42, "epolis-sample", &mut Http::new(&url))
    })
    .await??;
    println!(
        "{} finished: {} events, blueprint {:?}",
        summary.session_id,
        summary.events_sent,
        summary.blueprint.map(|b| b.attributes.into_iter().map(|a| (a.attribute, a.score)).collect::<Vec<_>>())
    );

    let csv = tokio::task::spawn_blocking(move || {
        ureq::get(&format!("{base}/v1/export?kind=actions&format=csv"))
            .call()?
            .body_mut()
            .read_to_string()
    })
    .await??;
    print!("{csv}");

    let _ = stop.send(());
    server.await??;
    Ok(())
}
