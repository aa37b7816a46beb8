use std::collections::{BTreeMap, HashMap};

use uuid::Uuid;

use super::{ActionRow, LogRecord, MovementRow, ProjectionDelta, Snapshot, StoreError};
use crate::session::{Event, Rules, Session};

/// State rebuilt from a log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replayed {
    pub sessions: BTreeMap<Uuid, Session>,
    pub actions: Vec<ActionRow>,
    pub movements: Vec<MovementRow>,
    pub warnings: Vec<String>,
}

impl Replayed {
    /// The projection this state implies, rows in log order.
    pub fn snapshot(&self) -> Snapshot {
        let mut sessions: Vec<_> = self.sessions.values().map(Into::into).collect();
        sessions.sort_by_key(|s: &super::SessionRow| s.created_ts);
        Snapshot {
            sessions,
            actions: self.actions.clone(),
            movements: self.movements.clone(),
        }
    }
}

/// Re-runs the session engine over `records` in sequence order. Every logged
/// client event must be accepted again, and every logged prompt must be the
/// one the engine opens; otherwise the log does not belong to these rules.
pub fn replay(records: &[LogRecord], rules: Rules<'_>) -> Result<Replayed, StoreError> {
    let mut out = Replayed::default();
    // Prompt the engine opened that has not yet been seen in the log.
    let mut pending: HashMap<Uuid, (u64, Event)> = HashMap::new();
    let diverged = |seq: u64, reason: String| StoreError::Divergent { seq, reason };

    for r in records {
        if let Some((opened_at, want)) = pending.remove(&r.session) {
            if r.event != want {
                return Err(diverged(
                    r.seq,
                    format!("move at seq {opened_at} opened {want:?} but the log continues with {:?}", r.event),
                ));
            }
            continue;
        }
        match &r.event {
            Event::SessionCreated {
                ts,
                player_name,
                avatar,
                pack_id,
                map,
            } => {
                if out.sessions.contains_key(&r.session) {
                    return Err(diverged(r.seq, format!("session {} created twice", r.session)));
                }
                if pack_id != rules.pack.pack_id() || map != rules.map.name() {
                    return Err(diverged(
                        r.seq,
                        format!(
                            "session uses pack {pack_id:?} on map {map:?}, loaded {:?} on {:?}",
                            rules.pack.pack_id(),
                            rules.map.name()
                        ),
                    ));
                }
                let (session, _) = Session::create(r.session, player_name, avatar, rules, *ts)
                    .map_err(|e| diverged(r.seq, e.to_string()))?;
                out.sessions.insert(r.session, session);
            }
            Event::Prompt { .. } => {
                return Err(diverged(r.seq, "prompt that no move opened".into()));
            }
            event => {
                let client = event.as_client().expect("client variants");
                let session = out
                    .sessions
                    .get_mut(&r.session)
                    .ok_or_else(|| diverged(r.seq, format!("unknown session {}", r.session)))?;
                let outcome = session
                    .handle_event(&client, rules)
                    .map_err(|e| diverged(r.seq, format!("{}: {e}", e.code())))?;
                let mut delta = ProjectionDelta::default();
                delta.record(session, &client, &outcome);
                out.actions.extend(delta.actions);
                out.movements.extend(delta.movements);
                if let Some(p) = outcome.emitted {
                    pending.insert(r.session, (r.seq, p));
                }
            }
        }
    }
    for (session, (seq, _)) in pending {
        out.warnings.push(format!(
            "session {session}: prompt opened at seq {seq} is missing from the log tail"
        ));
    }
    Ok(out)
}
