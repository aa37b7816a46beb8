//! Survey gamification engine: players roam a grid city, must answer every
//! dilemma they walk into, and finish at the phone booth. Every accepted
//! event is appended to a durable log from which all other state (sessions,
//! relational projection, exports, analytics) can be rebuilt.

pub mod clock;
pub mod content;
pub mod dilemma;
pub mod session;
pub mod world;
pub mod export;
pub mod store;
pub mod protocol;
pub mod service;
pub mod simbot;
pub mod analytics;
pub mod api;
pub mod cli;
