use std::path::Path;

use rusqlite::{params, Connection, OpenFlags, Row, Transaction};

use super::{ActionRow, MovementRow, SessionRow, StoreError};
use crate::clock::Millis;

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY NOT NULL,
    player_name TEXT NOT NULL,
    avatar TEXT NOT NULL,
    pack_id TEXT NOT NULL,
    phase TEXT NOT NULL,
    created_ts INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS actions (
    player_name TEXT NOT NULL,
    question_answer TEXT NOT NULL,
    question_number TEXT NOT NULL,
    question_description TEXT NOT NULL,
    timestamp INTEGER NOT NULL,
    session_id TEXT NOT NULL,
    time_to_answer_ms INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS movements (
    player_name TEXT NOT NULL,
    x_axis REAL NOT NULL,
    y_axis REAL NOT NULL,
    z_axis REAL NOT NULL,
    euler_x REAL NOT NULL,
    euler_y REAL NOT NULL,
    euler_z REAL NOT NULL,
    quat_x REAL NOT NULL,
    quat_y REAL NOT NULL,
    quat_z REAL NOT NULL,
    quat_w REAL NOT NULL,
    timestamp INTEGER NOT NULL,
    session_id TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS actions_ts ON actions (timestamp);
CREATE INDEX IF NOT EXISTS movements_ts ON movements (timestamp);
";

/// Rows produced by one committed batch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionDelta {
    pub session: Option<SessionRow>,
    pub actions: Vec<ActionRow>,
    pub movements: Vec<MovementRow>,
}

impl ProjectionDelta {
    pub fn is_empty(&self) -> bool {
        self.session.is_none() && self.actions.is_empty() && self.movements.is_empty()
    }
}

/// Half-open millisecond range `[from, to)`; either end may be open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeRange {
    pub from: Option<Millis>,
    pub to: Option<Millis>,
}

impl TimeRange {
    pub fn contains(&self, ts: Millis) -> bool {
        self.from.is_none_or(|f| ts >= f) && self.to.is_none_or(|t| ts < t)
    }
}

/// Closed rectangle on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_z: f64,
    pub max_x: f64,
    pub max_z: f64,
}

impl BoundingBox {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        (self.min_x..=self.max_x).contains(&x) && (self.min_z..=self.max_z).contains(&z)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionFilter {
    pub session_id: Option<String>,
    pub question_number: Option<String>,
    pub time: TimeRange,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MovementFilter {
    pub session_id: Option<String>,
    pub time: TimeRange,
    pub bbox: Option<BoundingBox>,
}

/// Everything in a projection, read in one transaction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub sessions: Vec<SessionRow>,
    pub actions: Vec<ActionRow>,
    pub movements: Vec<MovementRow>,
}

impl Snapshot {
    pub fn row_count(&self) -> usize {
        self.actions.len() + self.movements.len()
    }

    /// Multiset equality: same rows regardless of storage order. Floats are
    /// compared bit for bit.
    pub fn same_rows(&self, other: &Snapshot) -> bool {
        fn key(m: &MovementRow) -> (String, Millis, [u64; 10], String) {
            (
                m.session_id.clone(),
                m.timestamp,
                [
                    m.x_axis, m.y_axis, m.z_axis, m.euler_x, m.euler_y, m.euler_z, m.quat_x,
                    m.quat_y, m.quat_z, m.quat_w,
                ]
                .map(f64::to_bits),
                m.player_name.clone(),
            )
        }
        let sorted = |s: &Snapshot| {
            let mut sessions = s.sessions.clone();
            sessions.sort_by(|a, b| a.session_id.cmp(&b.session_id));
            let mut actions = s.actions.clone();
            actions.sort();
            let mut movements: Vec<_> = s.movements.iter().map(key).collect();
            movements.sort();
            (sessions, actions, movements)
        };
        sorted(self) == sorted(other)
    }
}

/// Single-file relational projection of the log.
#[derive(Debug)]
pub struct Projection {
    conn: Connection,
}

impl Projection {
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let conn = Connection::open(path)?;
        conn.query_row("PRAGMA journal_mode=WAL", [], |r| r.get::<_, String>(0))?;
        // The log is the durable copy; the projection can always be rebuilt.
        conn.pragma_update(None, "synchronous", "NORMAL")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self { conn })
    }

    /// Applies a batch atomically.
    pub fn apply(&mut self, delta: &ProjectionDelta) -> Result<(), StoreError> {
        let tx = self.conn.transaction()?;
        write_delta(&tx, delta)?;
        tx.commit()?;
        Ok(())
    }

    /// Applies many batches in one transaction (used by rebuilds).
    pub fn apply_all<'a>(
        &mut self,
        deltas: impl IntoIterator<Item = &'a ProjectionDelta>,
    ) -> Result<(), StoreError> {
        let tx = self.conn.transaction()?;
        for d in deltas {
            write_delta(&tx, d)?;
        }
        tx.commit()?;
        Ok(())
    }

    /// Writes every row of `snap` in one transaction, in its order.
    pub fn load(&mut self, snap: &Snapshot) -> Result<(), StoreError> {
        let sessions: Vec<ProjectionDelta> = snap
            .sessions
            .iter()
            .map(|s| ProjectionDelta {
                session: Some(s.clone()),
                ..Default::default()
            })
            .collect();
        let rows = ProjectionDelta {
            session: None,
            actions: snap.actions.clone(),
            movements: snap.movements.clone(),
        };
        self.apply_all(sessions.iter().chain([&rows]))
    }

    pub fn clear(&mut self) -> Result<(), StoreError> {
        self.conn
            .execute_batch("DELETE FROM sessions; DELETE FROM actions; DELETE FROM movements;")?;
        Ok(())
    }

    /// Folds the write-ahead log into the main file.
    pub fn checkpoint(&mut self) -> Result<(), StoreError> {
        self.conn
            .query_row("PRAGMA wal_checkpoint(TRUNCATE)", [], |_| Ok(()))?;
        Ok(())
    }

    pub fn snapshot(&mut self) -> Result<Snapshot, StoreError> {
        read_snapshot(&mut self.conn)
    }
}

fn write_delta(tx: &Transaction<'_>, d: &ProjectionDelta) -> Result<(), StoreError> {
    if let Some(s) = &d.session {
        tx.prepare_cached(
            "INSERT INTO sessions (session_id, player_name, avatar, pack_id, phase, created_ts)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)
             ON CONFLICT(session_id) DO UPDATE SET phase = excluded.phase",
        )?
        .execute(params![s.session_id, s.player_name, s.avatar, s.pack_id, s.phase, s.created_ts])?;
    }
    if !d.actions.is_empty() {
        let mut stmt = tx.prepare_cached(
            "INSERT INTO actions VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
        )?;
        for a in &d.actions {
            stmt.execute(params![
                a.player_name,
                a.question_answer,
                a.question_number,
                a.question_description,
                a.timestamp,
                a.session_id,
                a.time_to_answer_ms
            ])?;
        }
    }
    if !d.movements.is_empty() {
        let mut stmt = tx.prepare_cached(
            "INSERT INTO movements VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13)",
        )?;
        for m in &d.movements {
            stmt.execute(params![
                m.player_name,
                m.x_axis,
                m.y_axis,
                m.z_axis,
                m.euler_x,
                m.euler_y,
                m.euler_z,
                m.quat_x,
                m.quat_y,
                m.quat_z,
                m.quat_w,
                m.timestamp,
                m.session_id
            ])?;
        }
    }
    Ok(())
}

/// Opens a read-only connection. Each query runs in its own read
/// transaction, so it sees a committed state even while batches land.
pub struct Reader {
    conn: Connection,
}

impl Reader {
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let conn = Connection::open_with_flags(
            path,
            OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX,
        )?;
        Ok(Self { conn })
    }

    pub fn snapshot(&mut self) -> Result<Snapshot, StoreError> {
        read_snapshot(&mut self.conn)
    }

    /// Matching actions ordered by (timestamp, insertion order).
    pub fn actions(&mut self, f: &ActionFilter) -> Result<Vec<ActionRow>, StoreError> {
        let tx = self.conn.transaction()?;
        let rows = query_actions(&tx, f)?;
        tx.finish()?;
        Ok(rows)
    }

    /// Matching movements ordered by (timestamp, insertion order).
    pub fn movements(&mut self, f: &MovementFilter) -> Result<Vec<MovementRow>, StoreError> {
        let tx = self.conn.transaction()?;
        let rows = query_movements(&tx, f)?;
        tx.finish()?;
        Ok(rows)
    }
}

fn read_snapshot(conn: &mut Connection) -> Result<Snapshot, StoreError> {
    let tx = conn.transaction()?;
    let sessions = tx
        .prepare("SELECT session_id, player_name, avatar, pack_id, phase, created_ts FROM sessions ORDER BY created_ts, rowid")?
        .query_map([], |r| {
            Ok(SessionRow {
                session_id: r.get(0)?,
                player_name: r.get(1)?,
                avatar: r.get(2)?,
                pack_id: r.get(3)?,
                phase: r.get(4)?,
                created_ts: r.get(5)?,
            })
        })?
        .collect::<Result<Vec<_>, _>>()?;
    let actions = query_actions(&tx, &ActionFilter::default())?;
    let movements = query_movements(&tx, &MovementFilter::default())?;
    tx.finish()?;
    Ok(Snapshot {
        sessions,
        actions,
        movements,
    })
}

/// `WHERE` clause builder with positional parameters.
#[derive(Default)]
struct Predicates {
    clauses: Vec<&'static str>,
    values: Vec<rusqlite::types::Value>,
}

impl Predicates {
    fn push(&mut self, clause: &'static str, v: impl Into<rusqlite::types::Value>) {
        self.clauses.push(clause);
        self.values.push(v.into());
    }

    fn time(&mut self, t: TimeRange) {
        if let Some(from) = t.from {
            self.push("timestamp >= ?", from);
        }
        if let Some(to) = t.to {
            self.push("timestamp < ?", to);
        }
    }

    fn sql(&self, select: &str) -> String {
        let mut sql = select.to_owned();
        if !self.clauses.is_empty() {
            sql.push_str(" WHERE ");
            sql.push_str(&self.clauses.join(" AND "));
        }
        sql.push_str(" ORDER BY timestamp, rowid");
        sql
    }
}

fn query_actions(tx: &Transaction<'_>, f: &ActionFilter) -> Result<Vec<ActionRow>, StoreError> {
    let mut p = Predicates::default();
    if let Some(s) = &f.session_id {
        p.push("session_id = ?", s.clone());
    }
    if let Some(q) = &f.question_number {
        p.push("question_number = ?", q.clone());
    }
    p.time(f.time);
    let sql = p.sql(
        "SELECT player_name, question_answer, question_number, question_description, timestamp, session_id, time_to_answer_ms FROM actions",
    );
    let mut stmt = tx.prepare(&sql)?;
    let rows = stmt
        .query_map(rusqlite::params_from_iter(&p.values), action_from_row)?
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

fn query_movements(
    tx: &Transaction<'_>,
    f: &MovementFilter,
) -> Result<Vec<MovementRow>, StoreError> {
    let mut p = Predicates::default();
    if let Some(s) = &f.session_id {
        p.push("session_id = ?", s.clone());
    }
    p.time(f.time);
    if let Some(b) = f.bbox {
        p.push("x_axis >= ?", b.min_x);
        p.push("x_axis <= ?", b.max_x);
        p.push("z_axis >= ?", b.min_z);
        p.push("z_axis <= ?", b.max_z);
    }
    let sql = p.sql(
        "SELECT player_name, x_axis, y_axis, z_axis, euler_x, euler_y, euler_z, quat_x, quat_y, quat_z, quat_w, timestamp, session_id FROM movements",
    );
    let mut stmt = tx.prepare(&sql)?;
    let rows = stmt
        .query_map(rusqlite::params_from_iter(&p.values), movement_from_row)?
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

fn action_from_row(r: &Row<'_>) -> rusqlite::Result<ActionRow> {
    Ok(ActionRow {
        player_name: r.get(0)?,
        question_answer: r.get(1)?,
        question_number: r.get(2)?,
        question_description: r.get(3)?,
        timestamp: r.get(4)?,
        session_id: r.get(5)?,
        time_to_answer_ms: r.get(6)?,
    })
}

fn movement_from_row(r: &Row<'_>) -> rusqlite::Result<MovementRow> {
    Ok(MovementRow {
        player_name: r.get(0)?,
        x_axis: r.get(1)?,
        y_axis: r.get(2)?,
        z_axis: r.get(3)?,
        euler_x: r.get(4)?,
        euler_y: r.get(5)?,
        euler_z: r.get(6)?,
        quat_x: r.get(7)?,
        quat_y: r.get(8)?,
        quat_z: r.get(9)?,
        quat_w: r.get(10)?,
        timestamp: r.get(11)?,
        session_id: r.get(12)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn action(session: &str, q: &str, ts: Millis) -> ActionRow {
        ActionRow {
            player_name: "p".into(),
            question_answer: "A".into(),
            question_number: q.into(),
            question_description: "d".into(),
            timestamp: ts,
            session_id: session.into(),
            time_to_answer_ms: 10,
        }
    }

    fn movement(session: &str, x: f64, z: f64, ts: Millis) -> MovementRow {
        MovementRow {
            player_name: "p".into(),
            x_axis: x,
            y_axis: 0.0,
            z_axis: z,
            euler_x: 0.0,
            euler_y: 0.1 + 0.2,
            euler_z: 0.0,
            quat_x: 0.0,
            quat_y: 0.0,
            quat_z: 0.0,
            quat_w: 1.0,
            timestamp: ts,
            session_id: session.into(),
        }
    }

    fn fixture() -> (tempfile::TempDir, Projection, Reader) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("projection.db");
        let mut p = Projection::open(&path).unwrap();
        let mut delta = ProjectionDelta::default();
        for (n, s) in ["s1", "s2", "s3"].into_iter().enumerate() {
            for (k, q) in ["Q1", "Q2"].into_iter().enumerate() {
                delta.actions.push(action(s, q, (n * 10 + k) as Millis));
            }
            delta.movements.push(movement(s, n as f64 * 4.0 + 0.5, 0.5, n as Millis));
        }
        p.apply(&delta).unwrap();
        let r = Reader::open(&path).unwrap();
        (dir, p, r)
    }

    #[test]
    fn action_filters() {
        let (_dir, _p, mut r) = fixture();
        let q1 = r
            .actions(&ActionFilter {
                question_number: Some("Q1".into()),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(q1.len(), 3);
        assert!(q1.iter().all(|a| a.question_number == "Q1"));
        assert_eq!(r.actions(&ActionFilter::default()).unwrap().len(), 6);
        let none = r
            .actions(&ActionFilter {
                time: TimeRange {
                    from: Some(1000),
                    to: Some(2000),
                },
                ..Default::default()
            })
            .unwrap();
        assert!(none.is_empty());
        let all = r.actions(&ActionFilter::default()).unwrap();
        assert!(all.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn movement_filters() {
        let (_dir, _p, mut r) = fixture();
        let corner = r
            .movements(&MovementFilter {
                bbox: Some(BoundingBox {
                    min_x: 4.0,
                    min_z: 0.0,
                    max_x: 8.0,
                    max_z: 4.0,
                }),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(corner.len(), 1);
        assert_eq!(corner[0].session_id, "s2");
        let unknown = r
            .movements(&MovementFilter {
                session_id: Some("nope".into()),
                ..Default::default()
            })
            .unwrap();
        assert!(unknown.is_empty());
    }

    #[test]
    fn floats_survive_bit_exact() {
        let (_dir, mut p, _r) = fixture();
        let snap = p.snapshot().unwrap();
        assert_eq!(snap.movements[0].euler_y.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn session_upsert_updates_phase() {
        let (_dir, mut p, _r) = fixture();
        let mut row = SessionRow {
            session_id: "s1".into(),
            player_name: "p".into(),
            avatar: "a".into(),
            pack_id: "k".into(),
            phase: "roaming".into(),
            created_ts: 0,
        };
        p.apply(&ProjectionDelta {
            session: Some(row.clone()),
            ..Default::default()
        })
        .unwrap();
        row.phase = "completed".into();
        p.apply(&ProjectionDelta {
            session: Some(row.clone()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(p.snapshot().unwrap().sessions, vec![row]);
    }

    #[test]
    fn multiset_comparison_ignores_order() {
        let a = Snapshot {
            actions: vec![action("s", "Q1", 1), action("s", "Q2", 1)],
            ..Default::default()
        };
        let mut b = a.clone();
        b.actions.reverse();
        assert!(a.same_rows(&b));
        b.actions[0].time_to_answer_ms += 1;
        assert!(!a.same_rows(&b));
    }
}
