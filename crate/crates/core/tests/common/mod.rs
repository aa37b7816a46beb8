#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;
use std::thread::JoinHandle;

use epolis::clock::{IdSource, Millis, SystemClock, VirtualClock};
use epolis::content::Content;
use epolis::service::GameService;
use epolis::simbot::{self, BotPolicy, InProcess, PopulationReport};
use epolis::store::DataDir;

pub const EPOCH: Millis = 1_705_312_800_000;

/// Runs `players` seeded bots one after another on simulated time.
pub fn simulate(dir: &Path, players: usize, seed: u64) -> (GameService, PopulationReport) {
    let clock = Arc::new(VirtualClock::starting_at(EPOCH));
    let service = GameService::open(
        Content::sample(),
        DataDir::new(dir),
        clock.clone(),
        IdSource::seeded(seed),
    )
    .expect("open service");
    let mut backend = InProcess::with_virtual_clock(&service, clock);
    let report = simbot::run_population(
        players,
        seed,
        &BotPolicy::default(),
        "epolis-sample",
        &mut backend,
    );
    (service, report)
}

/// An HTTP server on an ephemeral port, stopped on drop.
pub struct TestServer {
    pub base: String,
    pub service: Arc<GameService>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl TestServer {
    pub fn start(dir: &Path) -> Self {
        let service = Arc::new(
            GameService::open(
                Content::sample(),
                DataDir::new(dir),
                Arc::new(SystemClock),
                IdSource::Random,
            )
            .expect("open service"),
        );
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let shared = service.clone();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(4)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                epolis::api::serve(listener, shared, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().expect("server bound");
        Self {
            base: format!("http://{addr}"),
            service,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn agent() -> ureq::Agent {
        ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into()
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
