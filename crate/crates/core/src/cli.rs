//! `epolis` command line. The binary only forwards `std::env::args` here so
//! that commands can be driven from tests with captured output.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use uuid::Uuid;

use crate::analytics::{self, AnalyticsError};
use crate::clock::{IdSource, Millis, SystemClock, VirtualClock};
use crate::content::{Content, ContentError};
use crate::export::{ExportError, ExportFormat, ExportKind, ExportMode};
use crate::service::{GameService, ServiceError};
use crate::simbot::{self, BotPolicy, InProcess, Movement};
use crate::store::{
    rebuild_projection, ActionFilter, DataDir, MovementFilter, Reader, RebuildOutcome, StoreError,
};

/// Start of simulated time: 2024-01-15T10:00:00Z.
pub const SIMULATION_EPOCH_MS: Millis = 1_705_312_800_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "epolis", version, about = "Survey gamification server and tooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API until interrupted.
    Serve {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        pack: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
    /// Check a map and pack, reporting every problem in both.
    Validate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        pack: PathBuf,
    },
    /// Play seeded bots against an in-process server on simulated time.
    Simulate {
        #[arg(long)]
        players: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "shortest-path")]
        policy: Movement,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        pack: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Write the recorded actions or movements in one of the export formats.
    Export {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        format: String,
        #[arg(long, default_value = "paper")]
        mode: String,
        #[arg(long)]
        data: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Print an analytics report over the recorded data.
    Analyze {
        #[arg(long, value_enum)]
        report: Report,
        #[arg(long, default_value_t = 2.0)]
        cell_size: f64,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// JSON instead of CSV.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        data: PathBuf,
    },
    /// Rebuild the relational projection from the event log.
    Replay {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Tta,
    Hotspots,
    Distribution,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid content")]
    Content(#[from] ContentError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Content(_) | Self::Analytics(_) => EXIT_USAGE,
            Self::Service(ServiceError::ContentMismatch(_))
            | Self::Service(ServiceError::Export(
                ExportError::UnsupportedFormat(_)
                | ExportError::UnsupportedKind(_)
                | ExportError::UnsupportedMode(_),
            )) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        Self::Service(e.into())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Content(c) => {
                    for line in c.diagnostics() {
                        let _ = writeln!(err, "{line}");
                    }
                }
                other => {
                    let _ = writeln!(err, "error: {other}");
                }
            }
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Serve {
            map,
            pack,
            data,
            listen,
        } => serve(&map, &pack, &data, listen, err),
        Command::Validate { map, pack } => {
            Content::load(&map, &pack)?;
            writeln!(out, "OK")?;
            Ok(())
        }
        Command::Simulate {
            players,
            seed,
            policy,
            map,
            pack,
            data,
        } => simulate(players, seed, policy, &map, &pack, &data, out),
        Command::Export {
            kind,
            format,
            mode,
            data,
            output,
        } => export(&kind, &format, &mode, &data, output.as_deref(), out),
        Command::Analyze {
            report,
            cell_size,
            top,
            json,
            data,
        } => analyze(report, cell_size, top, json, &data, out),
        Command::Replay { data } => replay(&data, out, err),
    }
}

fn serve(
    map: &Path,
    pack: &Path,
    data: &Path,
    listen: SocketAddr,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let content = Content::load(map, pack)?;
    let service = GameService::open(
        content,
        DataDir::new(data),
        Arc::new(SystemClock),
        IdSource::Random,
    )?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(listen).await?;
        writeln!(err, "listening on {}", listener.local_addr()?)?;
        err.flush()?;
        crate::api::serve(listener, Arc::new(service), shutdown_signal()).await?;
        Ok::<_, CliError>(())
    })?;
    // Every accepted batch was synced before its response; nothing is buffered.
    writeln!(err, "shut down")?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {}
        () = term => {}
    }
}

/// Deterministic part of a simulation run, printed as JSON.
#[derive(Debug, Serialize)]
pub struct SimulationReport {
    pub players: usize,
    pub base_seed: u64,
    pub policy: Movement,
    pub sessions: usize,
    pub completed: usize,
    pub total_actions: usize,
    pub total_movements: usize,
    pub events_sent: usize,
    pub session_ids: Vec<Uuid>,
    pub failures: Vec<simbot::BotFailure>,
}

fn simulate(
    players: usize,
    seed: u64,
    movement: Movement,
    map: &Path,
    pack: &Path,
    data: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if players == 0 {
        return Err(CliError::Usage("--players must be at least 1".into()));
    }
    let dir = DataDir::new(data);
    // Seeded ids would collide with those of an earlier run.
    if std::fs::metadata(dir.log_path()).is_ok_and(|m| m.len() > 0) {
        return Err(CliError::Usage(format!(
            "{} already holds events; simulate needs a fresh data directory",
            data.display()
        )));
    }
    let content = Content::load(map, pack)?;
    let pack_id = content.pack.pack_id().to_owned();
    let clock = Arc::new(VirtualClock::starting_at(SIMULATION_EPOCH_MS));
    let service = GameService::open(content, dir, clock.clone(), IdSource::seeded(seed))?;
    let policy = BotPolicy {
        movement,
        ..BotPolicy::default()
    };
    // One bot at a time against the shared virtual clock keeps the log
    // byte-identical across runs.
    let mut backend = InProcess::with_virtual_clock(&service, clock);
    let report = simbot::run_population(players, seed, &policy, &pack_id, &mut backend);
    let summary = SimulationReport {
        players,
        base_seed: seed,
        policy: movement,
        sessions: report.sessions,
        completed: report.completed,
        total_actions: report.total_actions,
        total_movements: report.total_movements,
        events_sent: report.events_sent,
        session_ids: report.summaries.iter().map(|s| s.session_id).collect(),
        failures: report.failures.clone(),
    };
    serde_json::to_writer_pretty(&mut *out, &summary).map_err(std::io::Error::from)?;
    writeln!(out)?;
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} of {players} bots failed",
            report.failures.len()
        )))
    }
}

fn open_reader(data: &Path) -> Result<Reader, CliError> {
    let path = DataDir::new(data).projection_path();
    if !path.exists() {
        return Err(CliError::Runtime(format!(
            "{} does not exist; run `epolis replay` to build it",
            path.display()
        )));
    }
    Ok(Reader::open(&path)?)
}

fn export(
    kind: &str,
    format: &str,
    mode: &str,
    data: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let kind: ExportKind = kind.parse()?;
    let format: ExportFormat = format.parse()?;
    let mode: ExportMode = mode.parse()?;
    let mut reader = open_reader(data)?;
    let mut buf = Vec::new();
    match kind {
        ExportKind::Actions => {
            let rows = reader.actions(&ActionFilter::default())?;
            crate::export::export_actions(&rows, format, mode, &mut buf)?;
        }
        ExportKind::Movements => {
            let rows = reader.movements(&MovementFilter::default())?;
            crate::export::export_movements(&rows, format, mode, &mut buf)?;
        }
    }
    match output {
        Some(path) => std::fs::write(path, buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn analyze(
    report: Report,
    cell_size: f64,
    top: usize,
    json: bool,
    data: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut reader = open_reader(data)?;
    let text = match report {
        Report::Tta => {
            let dir = DataDir::new(data);
            let content = Content::load(&dir.map_path(), &dir.pack_path())?;
            let actions = reader.actions(&ActionFilter::default())?;
            let movements = reader.movements(&MovementFilter::default())?;
            let stats = analytics::question_stats(&actions, &movements, &content.pack)?;
            if json {
                analytics::tta_json(&stats)
            } else {
                analytics::tta_csv(&stats)
            }
        }
        Report::Hotspots => {
            let movements = reader.movements(&MovementFilter::default())?;
            let grid = analytics::dwell_map(&movements, cell_size)?;
            let spots = analytics::hotspots(&grid, top);
            if json {
                analytics::hotspots_json(&spots, cell_size)
            } else {
                analytics::hotspots_csv(&spots)
            }
        }
        Report::Distribution => {
            let actions = reader.actions(&ActionFilter::default())?;
            let dist = analytics::answer_distribution(&actions);
            if json {
                analytics::distribution_json(&dist)
            } else {
                analytics::distribution_csv(&dist)
            }
        }
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn replay(data: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let dir = DataDir::new(data);
    if !dir.log_path().exists() {
        return Err(CliError::Usage(format!(
            "{} has no event log",
            data.display()
        )));
    }
    let content = Content::load(&dir.map_path(), &dir.pack_path())?;
    let report = rebuild_projection(&dir, content.rules())?;
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let mut line = format!("rows={}", report.rows);
    if !report.warnings.is_empty() {
        line.push_str(&format!(" warnings={}", report.warnings.len()));
    }
    match report.outcome {
        RebuildOutcome::Matched => writeln!(out, "OK {line}")?,
        RebuildOutcome::Created => writeln!(out, "OK {line} (projection created)")?,
        RebuildOutcome::Replaced => {
            writeln!(out, "MISMATCH {line} (projection replaced)")?;
            return Err(CliError::Runtime(
                "projection differed from the event log".into(),
            ));
        }
    }
    Ok(())
}
