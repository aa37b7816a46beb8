//! Time sources, timestamp rendering and session id generation.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use rand::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use uuid::Uuid;

/// Milliseconds since the Unix epoch, UTC.
pub type Millis = i64;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> Millis;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> Millis {
        Utc::now().timestamp_millis()
    }
}

/// Manually advanced clock used by simulations so that runs reproduce
/// byte-for-byte.
#[derive(Debug)]
pub struct VirtualClock(AtomicI64);

impl VirtualClock {
    pub fn starting_at(ms: Millis) -> Self {
        Self(AtomicI64::new(ms))
    }

    /// Moves the clock forward to `ms` if it is later than the current time.
    pub fn advance_to(&self, ms: Millis) {
        self.0.fetch_max(ms, Ordering::SeqCst);
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> Millis {
        self.0.load(Ordering::SeqCst)
    }
}

/// `2024-01-15T10:23:45.123Z`
pub fn format_iso_ms(ms: Millis) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ms) {
        Some(t) => t.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ms.to_string(),
    }
}

pub fn parse_iso_ms(s: &str) -> Option<Millis> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|t| t.with_timezone(&Utc).timestamp_millis())
}

/// Source of RFC 4122 session ids.
pub enum IdSource {
    Random,
    /// Version-4 layout filled from a seeded generator; reproducible.
    Seeded(Mutex<Xoshiro256PlusPlus>),
}

impl IdSource {
    pub fn seeded(seed: u64) -> Self {
        Self::Seeded(Mutex::new(Xoshiro256PlusPlus::seed_from_u64(seed)))
    }

    pub fn next_id(&self) -> Uuid {
        match self {
            Self::Random => Uuid::new_v4(),
            Self::Seeded(rng) => {
                let mut bytes = [0u8; 16];
                rng.lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .fill_bytes(&mut bytes);
                uuid::Builder::from_random_bytes(bytes).into_uuid()
            }
        }
    }
}
