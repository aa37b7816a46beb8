use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::StoreError;
use crate::clock::Millis;
use crate::session::Event;

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRecord {
    pub seq: u64,
    pub session: Uuid,
    pub recv_ts: Millis,
    pub event: Event,
}

/// Where log bytes go. [`File`] is the real one; tests substitute faulty sinks.
pub trait LogSink: Send {
    fn write_all(&mut self, bytes: &[u8]) -> io::Result<()>;
    /// Flushes written bytes to stable storage.
    fn sync(&mut self) -> io::Result<()>;
    /// Drops everything past `len`, undoing a partially written batch.
    fn truncate(&mut self, len: u64) -> io::Result<()>;
}

impl LogSink for File {
    fn write_all(&mut self, bytes: &[u8]) -> io::Result<()> {
        Write::write_all(self, bytes)
    }

    fn sync(&mut self) -> io::Result<()> {
        self.sync_data()
    }

    fn truncate(&mut self, len: u64) -> io::Result<()> {
        self.set_len(len)?;
        self.seek(SeekFrom::End(0)).map(|_| ())
    }
}

/// Append-only writer. Assigns dense sequence numbers and keeps `recv_ts`
/// non-decreasing; a batch is durable once [`EventLog::append_batch`]
/// returns.
pub struct EventLog {
    sink: Box<dyn LogSink>,
    len: u64,
    next_seq: u64,
    last_recv_ts: Millis,
}

impl std::fmt::Debug for EventLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventLog")
            .field("len", &self.len)
            .field("next_seq", &self.next_seq)
            .finish_non_exhaustive()
    }
}

impl EventLog {
    /// Opens (or creates) a log file, continuing its sequence. A torn final
    /// line is cut off so new records start on a clean line.
    pub fn open(path: &Path) -> Result<(Self, LogContents), StoreError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let contents = read_log(&bytes)?;
        if contents.clean_len < bytes.len() as u64 {
            log::warn!(
                "{}: dropping {} bytes of torn trailing record",
                path.display(),
                bytes.len() as u64 - contents.clean_len
            );
            file.set_len(contents.clean_len)?;
            file.sync_data()?;
        }
        let mut log = Self::with_sink(Box::new(file), contents.clean_len);
        if let Some(last) = contents.records.last() {
            log.next_seq = last.seq + 1;
            log.last_recv_ts = last.recv_ts;
        }
        Ok((log, contents))
    }

    /// A log over an arbitrary sink that already holds `len` clean bytes and
    /// no records.
    pub fn with_sink(sink: Box<dyn LogSink>, len: u64) -> Self {
        Self {
            sink,
            len,
            next_seq: 1,
            last_recv_ts: Millis::MIN,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn append(
        &mut self,
        session: Uuid,
        recv_ts: Millis,
        event: Event,
    ) -> Result<LogRecord, StoreError> {
        let mut v = self.append_batch(session, recv_ts, vec![event])?;
        Ok(v.remove(0))
    }

    /// Writes every event as one record and syncs once. Either all records
    /// become durable and consume sequence numbers, or none do.
    pub fn append_batch(
        &mut self,
        session: Uuid,
        recv_ts: Millis,
        events: Vec<Event>,
    ) -> Result<Vec<LogRecord>, StoreError> {
        let recv_ts = recv_ts.max(self.last_recv_ts);
        let records: Vec<LogRecord> = events
            .into_iter()
            .zip(self.next_seq..)
            .map(|(event, seq)| LogRecord {
                seq,
                session,
                recv_ts,
                event,
            })
            .collect();
        if records.is_empty() {
            return Ok(records);
        }
        let mut buf = Vec::new();
        for r in &records {
            serde_json::to_writer(&mut buf, r).map_err(io::Error::from)?;
            buf.push(b'\n');
        }
        let written = self.sink.write_all(&buf).and_then(|()| self.sink.sync());
        if let Err(e) = written {
            if let Err(undo) = self.sink.truncate(self.len) {
                log::error!("could not roll back failed log append: {undo}");
            }
            return Err(e.into());
        }
        self.len += buf.len() as u64;
        self.next_seq += records.len() as u64;
        self.last_recv_ts = recv_ts;
        Ok(records)
    }
}

/// Parsed log plus any tolerated damage.
#[derive(Debug, Clone, Default)]
pub struct LogContents {
    pub records: Vec<LogRecord>,
    pub warnings: Vec<String>,
    /// Byte length of the undamaged prefix.
    pub clean_len: u64,
}

/// Parses a whole log. Only the final line may be damaged; anything else is
/// [`StoreError::CorruptRecord`].
pub fn read_log(bytes: &[u8]) -> Result<LogContents, StoreError> {
    let mut out = LogContents::default();
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < bytes.len() {
        line_no += 1;
        let rest = &bytes[offset..];
        let (line, next) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], offset + i + 1),
            None => (rest, bytes.len()),
        };
        let last = next == bytes.len();
        let parsed = std::str::from_utf8(line)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str::<LogRecord>(s).map_err(|e| e.to_string()));
        match parsed {
            Ok(record) => {
                let want = out.records.last().map_or(1, |r| r.seq + 1);
                if record.seq != want {
                    return Err(StoreError::CorruptRecord {
                        line: line_no,
                        reason: format!("seq {} where {want} was expected", record.seq),
                    });
                }
                if out.records.last().is_some_and(|r| record.recv_ts < r.recv_ts) {
                    return Err(StoreError::CorruptRecord {
                        line: line_no,
                        reason: "recv_ts went backwards".into(),
                    });
                }
                out.records.push(record);
                out.clean_len = next as u64;
            }
            Err(reason) if last => {
                out.warnings
                    .push(format!("line {line_no}: discarded torn final record ({reason})"));
            }
            Err(reason) => {
                return Err(StoreError::CorruptRecord {
                    line: line_no,
                    reason,
                })
            }
        }
        offset = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::{Arc, Mutex};

    use super::*;

    fn booth(ts: Millis) -> Event {
        Event::Booth { ts }
    }

    #[derive(Clone, Default)]
    struct Flaky {
        bytes: Arc<Mutex<Vec<u8>>>,
        fail_next: Arc<Mutex<bool>>,
    }

    impl LogSink for Flaky {
        fn write_all(&mut self, bytes: &[u8]) -> io::Result<()> {
            let mut b = self.bytes.lock().unwrap();
            // Half the batch lands before the failure, like a real short write.
            if std::mem::take(&mut *self.fail_next.lock().unwrap()) {
                b.extend_from_slice(&bytes[..bytes.len() / 2]);
                return Err(io::Error::new(io::ErrorKind::StorageFull, "disk full"));
            }
            b.extend_from_slice(bytes);
            Ok(())
        }
        fn sync(&mut self) -> io::Result<()> {
            Ok(())
        }
        fn truncate(&mut self, len: u64) -> io::Result<()> {
            self.bytes.lock().unwrap().truncate(len as usize);
            Ok(())
        }
    }

    #[test]
    fn first_append_is_seq_one() {
        let mut log = EventLog::with_sink(Box::new(Flaky::default()), 0);
        let r = log.append(Uuid::nil(), 5, booth(1)).unwrap();
        assert_eq!(r.seq, 1);
    }

    #[test]
    fn failed_append_consumes_no_seq_and_leaves_no_bytes() {
        let sink = Flaky::default();
        let mut log = EventLog::with_sink(Box::new(sink.clone()), 0);
        log.append(Uuid::nil(), 1, booth(1)).unwrap();
        *sink.fail_next.lock().unwrap() = true;
        let err = log
            .append_batch(Uuid::nil(), 2, vec![booth(2), booth(3)])
            .unwrap_err();
        assert!(matches!(err, StoreError::StorageFull(_)), "{err}");
        let r = log.append(Uuid::nil(), 3, booth(4)).unwrap();
        assert_eq!(r.seq, 2);
        let bytes = sink.bytes.lock().unwrap().clone();
        let contents = read_log(&bytes).unwrap();
        assert_eq!(contents.records.len(), 2);
        assert!(contents.warnings.is_empty());
    }

    #[test]
    fn recv_ts_never_decreases() {
        let mut log = EventLog::with_sink(Box::new(Flaky::default()), 0);
        log.append(Uuid::nil(), 100, booth(1)).unwrap();
        let r = log.append(Uuid::nil(), 40, booth(2)).unwrap();
        assert_eq!(r.recv_ts, 100);
    }

    #[test]
    fn line_format_is_pinned() {
        let r = LogRecord {
            seq: 7,
            session: Uuid::nil(),
            recv_ts: 12,
            event: Event::Answer {
                question: "Q1".into(),
                choice: "B".into(),
                ts: 10,
            },
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"seq":7,"session":"00000000-0000-0000-0000-000000000000","recv_ts":12,"event":{"type":"answer","question":"Q1","choice":"B","ts":10}}"#
        );
    }

    #[test]
    fn empty_log_is_empty_state() {
        let c = read_log(b"").unwrap();
        assert!(c.records.is_empty() && c.warnings.is_empty());
    }

    #[test]
    fn torn_tail_is_a_warning_and_middle_damage_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.log");
        {
            let (mut log, _) = EventLog::open(&path).unwrap();
            for ts in 0..3 {
                log.append(Uuid::nil(), ts, booth(ts)).unwrap();
            }
        }
        let full = std::fs::read(&path).unwrap();
        let torn = &full[..full.len() - 10];
        let c = read_log(torn).unwrap();
        assert_eq!(c.records.len(), 2);
        assert_eq!(c.warnings.len(), 1);

        let mut bad = full.clone();
        let first_nl = bad.iter().position(|&b| b == b'\n').unwrap();
        bad[first_nl - 3] = b'#';
        assert!(matches!(
            read_log(&bad),
            Err(StoreError::CorruptRecord { line: 1, .. })
        ));

        // Reopening a torn log trims it and continues the sequence.
        std::fs::write(&path, torn).unwrap();
        let (mut log, c) = EventLog::open(&path).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(log.append(Uuid::nil(), 9, booth(9)).unwrap().seq, 3);
        let c = read_log(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(c.records.len(), 3);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn seq_gap_is_corrupt() {
        let line = |seq: u64| {
            let mut s = serde_json::to_string(&LogRecord {
                seq,
                session: Uuid::nil(),
                recv_ts: 0,
                event: booth(0),
            })
            .unwrap();
            s.push('\n');
            s
        };
        let text = line(1) + &line(3);
        assert!(matches!(
            read_log(text.as_bytes()),
            Err(StoreError::CorruptRecord { line: 2, .. })
        ));
    }
}
