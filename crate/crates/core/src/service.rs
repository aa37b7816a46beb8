//! Game service: sessions, batched ingestion and queries over one data
//! directory. Transport-agnostic; the HTTP server and in-process bots both
//! drive it.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Arc, Mutex, RwLock};

use uuid::Uuid;

use crate::clock::{Clock, IdSource};
use crate::content::Content;
use crate::export::{self, ExportError, ExportFormat, ExportKind, ExportMode};
use crate::protocol::{
    ErrorBody, IngestResult, NewSession, PromptView, SessionCreated, SessionStateView,
    TriggerView, MAX_BATCH,
};
use crate::session::{Blueprint, ClientEvent, Event, Session, SessionError, PLAYER_SPEED};
use crate::store::{
    replay, ActionFilter, DataDir, MovementFilter, ProjectionDelta, Snapshot, Store, StoreError,
};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(Uuid),
    #[error("unknown pack {0:?}")]
    UnknownPack(String),
    #[error(transparent)]
    Rejected(SessionError),
    #[error("batch must hold 1 to {MAX_BATCH} events, got {0}")]
    BadBatch(usize),
    #[error("data directory was recorded with different content: {0}")]
    ContentMismatch(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession(_) => "UNKNOWN_SESSION",
            Self::UnknownPack(_) => "UNKNOWN_PACK",
            Self::Rejected(e) => e.code(),
            Self::BadBatch(_) => "BAD_BATCH",
            Self::ContentMismatch(_) => "CONTENT_MISMATCH",
            Self::Store(StoreError::StorageFull(_)) => "STORAGE_FULL",
            Self::Store(_) => "STORAGE",
            Self::Export(ExportError::UnsupportedFormat(_)) => "UNSUPPORTED_FORMAT",
            Self::Export(_) => "EXPORT",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().into(),
            message: self.to_string(),
        }
    }
}

type SessionCell = Arc<Mutex<Session>>;

pub struct GameService {
    content: Arc<Content>,
    store: Store,
    sessions: RwLock<HashMap<Uuid, SessionCell>>,
    clock: Arc<dyn Clock>,
    ids: IdSource,
}

impl std::fmt::Debug for GameService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameService")
            .field("store", &self.store)
            .finish_non_exhaustive()
    }
}

impl GameService {
    /// Opens `dir`, restoring every session recorded in its log.
    ///
    /// The map and pack are copied into the directory on first use; later
    /// opens must supply the same content.
    pub fn open(
        content: Content,
        dir: DataDir,
        clock: Arc<dyn Clock>,
        ids: IdSource,
    ) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(dir.root()).map_err(StoreError::from)?;
        for (path, source, what) in [
            (dir.map_path(), &content.map_source, "map"),
            (dir.pack_path(), &content.pack_source, "pack"),
        ] {
            match std::fs::read_to_string(&path) {
                Ok(existing) if existing == *source => {}
                Ok(_) => {
                    return Err(ServiceError::ContentMismatch(format!(
                        "{} differs from the {what} given",
                        path.display()
                    )))
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    std::fs::write(&path, source).map_err(StoreError::from)?;
                }
                Err(e) => return Err(StoreError::from(e).into()),
            }
        }
        let (store, contents) = Store::open(dir)?;
        for w in &contents.warnings {
            log::warn!("{w}");
        }
        let replayed = replay(&contents.records, content.rules())?;
        for w in &replayed.warnings {
            log::warn!("{w}");
        }
        store.reconcile(&replayed)?;
        let sessions = replayed
            .sessions
            .into_iter()
            .map(|(id, s)| (id, Arc::new(Mutex::new(s))))
            .collect();
        Ok(Self {
            content: Arc::new(content),
            store,
            sessions: RwLock::new(sessions),
            clock,
            ids,
        })
    }

    pub fn content(&self) -> &Content {
        &self.content
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn cell(&self, id: Uuid) -> Result<SessionCell, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(&id)
            .cloned()
            .ok_or(ServiceError::UnknownSession(id))
    }

    pub fn create_session(&self, req: &NewSession) -> Result<SessionCreated, ServiceError> {
        let rules = self.content.rules();
        if req.pack_id != rules.pack.pack_id() {
            return Err(ServiceError::UnknownPack(req.pack_id.clone()));
        }
        let id = self.ids.next_id();
        let now = self.clock.now_ms();
        let (session, event) = Session::create(id, &req.player_name, &req.avatar, rules, now)
            .map_err(ServiceError::Rejected)?;
        let delta = ProjectionDelta {
            session: Some((&session).into()),
            ..Default::default()
        };
        let created_ts = session.created_ts;
        let spawn = session.player.position;
        // Registered only after the log write, so a failed create leaves no trace.
        self.store.commit(id, now, vec![event], &delta)?;
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(SessionCreated {
            session_id: id,
            map: rules.map.to_document(),
            dilemma_count: rules.pack.len(),
            spawn,
            speed: PLAYER_SPEED,
            created_ts,
            triggers: rules
                .pack
                .dilemmas()
                .iter()
                .map(|d| TriggerView {
                    question: d.id.clone(),
                    zone: d.trigger,
                })
                .collect(),
        })
    }

    /// Applies events in order, stopping at the first rejection. Accepted
    /// events are durable before this returns; if the log write fails, the
    /// session is restored and nothing counts as accepted.
    pub fn ingest(&self, id: Uuid, events: &[ClientEvent]) -> Result<IngestResult, ServiceError> {
        if events.is_empty() || events.len() > MAX_BATCH {
            return Err(ServiceError::BadBatch(events.len()));
        }
        let cell = self.cell(id)?;
        let mut session = cell.lock().unwrap_or_else(|p| p.into_inner());
        let rules = self.content.rules();
        let before = session.clone();

        let mut result = IngestResult {
            accepted: 0,
            opened_prompt: None,
            completed: false,
            rejected_from: None,
            error: None,
        };
        let mut logged: Vec<Event> = Vec::with_capacity(events.len() + 1);
        let mut delta = ProjectionDelta::default();
        for (i, event) in events.iter().enumerate() {
            match session.handle_event(event, rules) {
                Ok(outcome) => {
                    delta.record(&session, event, &outcome);
                    logged.push(event.clone().into());
                    if let Some(q) = &outcome.opened_prompt {
                        result.opened_prompt = rules.pack.get(q).map(PromptView::from);
                    }
                    result.completed |= outcome.completed;
                    logged.extend(outcome.emitted);
                    result.accepted += 1;
                }
                Err(e) => {
                    if let SessionError::MoveWhilePrompted(q) = &e {
                        result.opened_prompt = rules.pack.get(q).map(PromptView::from);
                    }
                    result.rejected_from = Some(i);
                    result.error = Some(ErrorBody {
                        code: e.code().into(),
                        message: e.to_string(),
                    });
                    break;
                }
            }
        }
        if !logged.is_empty() {
            if let Err(e) = self.store.commit(id, self.clock.now_ms(), logged, &delta) {
                *session = before;
                return Err(e.into());
            }
        }
        Ok(result)
    }

    pub fn state(&self, id: Uuid) -> Result<SessionStateView, ServiceError> {
        let cell = self.cell(id)?;
        let session = cell.lock().unwrap_or_else(|p| p.into_inner());
        let prompt = session.open_prompt().and_then(|q| self.content.pack.get(q));
        Ok(SessionStateView::of(&session, prompt))
    }

    pub fn blueprint(&self, id: Uuid) -> Result<Blueprint, ServiceError> {
        let cell = self.cell(id)?;
        let session = cell.lock().unwrap_or_else(|p| p.into_inner());
        session
            .blueprint(&self.content.pack)
            .map_err(ServiceError::Rejected)
    }

    /// Copy of one session's state.
    pub fn session(&self, id: Uuid) -> Result<Session, ServiceError> {
        let cell = self.cell(id)?;
        let s = cell.lock().unwrap_or_else(|p| p.into_inner()).clone();
        Ok(s)
    }

    /// Copies of all sessions, keyed by id.
    pub fn sessions(&self) -> BTreeMap<Uuid, Session> {
        let cells: Vec<(Uuid, SessionCell)> = self
            .sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        cells
            .into_iter()
            .map(|(k, v)| (k, v.lock().unwrap_or_else(|p| p.into_inner()).clone()))
            .collect()
    }

    /// Everything in the projection, read in one transaction.
    pub fn snapshot(&self) -> Result<Snapshot, ServiceError> {
        Ok(self.store.reader()?.snapshot()?)
    }

    /// Writes an export of the current projection. Rows come from a single
    /// read transaction, so concurrent ingestion never tears the output.
    pub fn export(
        &self,
        kind: ExportKind,
        format: ExportFormat,
        mode: ExportMode,
        out: &mut dyn Write,
    ) -> Result<(), ServiceError> {
        let mut reader = self.store.reader()?;
        match kind {
            ExportKind::Actions => {
                let rows = reader.actions(&ActionFilter::default())?;
                export::export_actions(&rows, format, mode, out)?;
            }
            ExportKind::Movements => {
                let rows = reader.movements(&MovementFilter::default())?;
                export::export_movements(&rows, format, mode, out)?;
            }
        }
        Ok(())
    }
}
