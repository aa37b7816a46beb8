//! Append-only event log (the source of truth), a relational projection for
//! queries, and replay from one to the other.
//!
//! A data directory holds `events.log`, `projection.db` and copies of the map
//! and pack the log was recorded against, so it can be replayed on its own.

mod log;
mod projection;
mod replay;
mod rows;

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;
use uuid::Uuid;

pub use log::{read_log, EventLog, LogContents, LogRecord, LogSink};
pub use projection::{
    ActionFilter, BoundingBox, MovementFilter, Projection, ProjectionDelta, Reader, Snapshot,
    TimeRange,
};
pub use replay::{replay, Replayed};
pub use rows::{ActionRow, MovementRow, SessionRow};

use crate::clock::Millis;
use crate::session::{ClientEvent, Event, Outcome, Rules, Session};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage full: {0}")]
    StorageFull(io::Error),
    #[error("i/o failure: {0}")]
    Io(io::Error),
    #[error("corrupt log record on line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("log does not replay at seq {seq}: {reason}")]
    Divergent { seq: u64, reason: String },
    #[error("projection database: {0}")]
    Database(#[from] rusqlite::Error),
}

impl From<io::Error> for StoreError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::StorageFull {
            Self::StorageFull(e)
        } else {
            Self::Io(e)
        }
    }
}

impl ProjectionDelta {
    /// Adds the rows an accepted event produces and refreshes the session row.
    pub fn record(&mut self, session: &Session, event: &ClientEvent, outcome: &Outcome) {
        match event {
            ClientEvent::Move {
                position, euler, ts, ..
            } => self
                .movements
                .push(MovementRow::from_move(session, *position, *euler, *ts)),
            ClientEvent::Answer { .. } => {
                if let Some(a) = &outcome.answer {
                    self.actions.push(ActionRow::from_answer(session, a));
                }
            }
            ClientEvent::Booth { .. } => {}
        }
        self.session = Some(session.into());
    }
}

/// File layout of a data directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn log_path(&self) -> PathBuf {
        self.root.join("events.log")
    }

    pub fn projection_path(&self) -> PathBuf {
        self.root.join("projection.db")
    }

    pub fn map_path(&self) -> PathBuf {
        self.root.join("map.json")
    }

    pub fn pack_path(&self) -> PathBuf {
        self.root.join("pack.json")
    }
}

struct Writer {
    log: EventLog,
    projection: Projection,
}

/// Serialized appender in front of the log and the live projection.
///
/// Commits from all sessions pass through one lock, so log order and
/// projection insertion order agree.
pub struct Store {
    dir: DataDir,
    writer: Mutex<Writer>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("dir", &self.dir).finish_non_exhaustive()
    }
}

impl Store {
    /// Opens the data directory, creating it if needed. Returns the records
    /// already in the log so the caller can restore sessions from them.
    pub fn open(dir: DataDir) -> Result<(Self, LogContents), StoreError> {
        std::fs::create_dir_all(dir.root())?;
        let (log, contents) = EventLog::open(&dir.log_path())?;
        let projection = Projection::open(&dir.projection_path())?;
        let store = Self {
            dir,
            writer: Mutex::new(Writer { log, projection }),
        };
        Ok((store, contents))
    }

    pub fn dir(&self) -> &DataDir {
        &self.dir
    }

    /// Appends `events` durably, then applies `delta` to the projection.
    ///
    /// Once the log write succeeds the events count as committed; a failure
    /// in the projection afterwards is logged and repaired by a rebuild.
    pub fn commit(
        &self,
        session: Uuid,
        recv_ts: Millis,
        events: Vec<Event>,
        delta: &ProjectionDelta,
    ) -> Result<Vec<LogRecord>, StoreError> {
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let records = w.log.append_batch(session, recv_ts, events)?;
        if !delta.is_empty() {
            if let Err(e) = w.projection.apply(delta) {
                ::log::error!("projection update failed after seq {}: {e}", w.log.next_seq() - 1);
            }
        }
        Ok(records)
    }

    /// Rebuilds the live projection if it disagrees with `replayed`.
    /// Returns whether a rebuild happened.
    pub fn reconcile(&self, replayed: &Replayed) -> Result<bool, StoreError> {
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let want = replayed.snapshot();
        if w.projection.snapshot()?.same_rows(&want) {
            return Ok(false);
        }
        ::log::warn!("projection out of date; rebuilding from the log");
        w.projection.clear()?;
        w.projection.load(&want)?;
        Ok(true)
    }

    /// A read-only view for queries and exports.
    pub fn reader(&self) -> Result<Reader, StoreError> {
        Reader::open(&self.dir.projection_path())
    }
}

/// What [`rebuild_projection`] found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebuildOutcome {
    /// Existing projection already matched the log.
    Matched,
    /// No projection existed; one was created.
    Created,
    /// Existing projection differed and was replaced.
    Replaced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RebuildReport {
    pub outcome: RebuildOutcome,
    pub rows: usize,
    pub sessions: usize,
    pub warnings: Vec<String>,
}

/// Replays the log of `dir` into a fresh projection and compares it with
/// the existing one, which is replaced unless identical. The log itself is
/// only read.
pub fn rebuild_projection(dir: &DataDir, rules: Rules<'_>) -> Result<RebuildReport, StoreError> {
    let bytes = match std::fs::read(dir.log_path()) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let contents = read_log(&bytes)?;
    let mut replayed = replay(&contents.records, rules)?;
    let mut warnings = contents.warnings;
    warnings.append(&mut replayed.warnings);
    let want = replayed.snapshot();

    let live = dir.projection_path();
    let outcome = if live.exists() {
        let have = Projection::open(&live)?.snapshot()?;
        if have.same_rows(&want) {
            RebuildOutcome::Matched
        } else {
            RebuildOutcome::Replaced
        }
    } else {
        RebuildOutcome::Created
    };
    if outcome != RebuildOutcome::Matched {
        let tmp = dir.root().join("projection.db.rebuild");
        remove_db(&tmp)?;
        {
            let mut fresh = Projection::open(&tmp)?;
            fresh.load(&want)?;
            fresh.checkpoint()?;
        }
        remove_db(&live)?;
        std::fs::rename(&tmp, &live)?;
    }
    Ok(RebuildReport {
        outcome,
        rows: want.row_count(),
        sessions: want.sessions.len(),
        warnings,
    })
}

fn remove_db(path: &Path) -> Result<(), StoreError> {
    for suffix in ["", "-wal", "-shm"] {
        let mut p = path.as_os_str().to_owned();
        p.push(suffix);
        match std::fs::remove_file(PathBuf::from(p)) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
