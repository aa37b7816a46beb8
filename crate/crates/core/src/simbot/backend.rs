use std::sync::Arc;
use std::time::Duration;

use uuid::Uuid;

use super::BotError;
use crate::clock::VirtualClock;
use crate::protocol::{
    ErrorBody, IngestBatch, IngestResult, NewSession, SessionCreated, SessionStateView,
};
use crate::service::{GameService, ServiceError};
use crate::session::{Blueprint, ClientEvent};

/// What a bot needs from a game server. Rejections inside a batch are part
/// of a successful [`IngestResult`]; `Err` means the request itself failed.
pub trait GameBackend {
    fn create_session(&mut self, req: &NewSession) -> Result<SessionCreated, BotError>;
    fn ingest(&mut self, id: Uuid, events: &[ClientEvent]) -> Result<IngestResult, BotError>;
    fn state(&mut self, id: Uuid) -> Result<SessionStateView, BotError>;
    fn blueprint(&mut self, id: Uuid) -> Result<Blueprint, BotError>;
}

impl From<ServiceError> for BotError {
    fn from(e: ServiceError) -> Self {
        BotError::Server(e.body())
    }
}

/// Calls a [`GameService`] directly. With a virtual clock, server time is
/// advanced to each batch's latest event first, so `recv_ts` is synthetic
/// and runs reproduce byte for byte.
pub struct InProcess<'a> {
    service: &'a GameService,
    clock: Option<Arc<VirtualClock>>,
}

impl<'a> InProcess<'a> {
    pub fn new(service: &'a GameService) -> Self {
        Self {
            service,
            clock: None,
        }
    }

    pub fn with_virtual_clock(service: &'a GameService, clock: Arc<VirtualClock>) -> Self {
        Self {
            service,
            clock: Some(clock),
        }
    }
}

impl GameBackend for InProcess<'_> {
    fn create_session(&mut self, req: &NewSession) -> Result<SessionCreated, BotError> {
        Ok(self.service.create_session(req)?)
    }

    fn ingest(&mut self, id: Uuid, events: &[ClientEvent]) -> Result<IngestResult, BotError> {
        if let (Some(clock), Some(last)) = (&self.clock, events.iter().map(ClientEvent::ts).max())
        {
            clock.advance_to(last);
        }
        Ok(self.service.ingest(id, events)?)
    }

    fn state(&mut self, id: Uuid) -> Result<SessionStateView, BotError> {
        Ok(self.service.state(id)?)
    }

    fn blueprint(&mut self, id: Uuid) -> Result<Blueprint, BotError> {
        Ok(self.service.blueprint(id)?)
    }
}

/// Talks to a running server over HTTP.
pub struct Http {
    agent: ureq::Agent,
    base: String,
}

impl Http {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            agent,
            base: base.trim_end_matches('/').to_owned(),
        }
    }

    fn decode<T: serde::de::DeserializeOwned>(
        mut resp: ureq::http::Response<ureq::Body>,
        ok: &[u16],
    ) -> Result<T, BotError> {
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BotError::Transport(e.to_string()))?;
        if ok.contains(&status) {
            serde_json::from_str(&text)
                .map_err(|e| BotError::Transport(format!("bad response body: {e}: {text}")))
        } else {
            Err(match serde_json::from_str::<ErrorBody>(&text) {
                Ok(body) => BotError::Server(body),
                Err(_) => BotError::Transport(format!("HTTP {status}: {text}")),
            })
        }
    }

    fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T, BotError> {
        let resp = self
            .agent
            .get(&format!("{}{path}", self.base))
            .call()
            .map_err(|e| BotError::Transport(e.to_string()))?;
        Self::decode(resp, &[200])
    }
}

impl GameBackend for Http {
    fn create_session(&mut self, req: &NewSession) -> Result<SessionCreated, BotError> {
        let resp = self
            .agent
            .post(&format!("{}/v1/sessions", self.base))
            .send_json(req)
            .map_err(|e| BotError::Transport(e.to_string()))?;
        Self::decode(resp, &[201])
    }

    fn ingest(&mut self, id: Uuid, events: &[ClientEvent]) -> Result<IngestResult, BotError> {
        let resp = self
            .agent
            .post(&format!("{}/v1/sessions/{id}/events", self.base))
            .send_json(IngestBatch {
                events: events.to_vec(),
            })
            .map_err(|e| BotError::Transport(e.to_string()))?;
        // 409 still carries an IngestResult describing the partial accept.
        Self::decode(resp, &[200, 409])
    }

    fn state(&mut self, id: Uuid) -> Result<SessionStateView, BotError> {
        self.get(&format!("/v1/sessions/{id}/state"))
    }

    fn blueprint(&mut self, id: Uuid) -> Result<Blueprint, BotError> {
        self.get(&format!("/v1/sessions/{id}/blueprint"))
    }
}
