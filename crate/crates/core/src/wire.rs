//! JSON wire protocol between a session and its clients. One JSON object
//! per WebSocket text frame, discriminated by `type`.
//!
//! See `docs/wire-protocol.md` for the full schema.

use serde::{Deserialize, Serialize};

use crate::dsl::SafetyReport;
use crate::orchestrator::{
    ConfigOverride, Input, Outbound, OutboundBody, SessionEvent, Snapshot, UserInterrupt,
};

pub const PROTOCOL_VERSION: u32 = 1;

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// Text command, handled like a wake followed by this utterance.
    Command { text: String },
    Interrupt { kind: UserInterrupt },
    ConfigSet { pause_delay_s: f64 },
    /// Ask for a fresh snapshot.
    Snapshot,
}

impl ClientMessage {
    /// The session input this maps to; `None` for a snapshot request.
    pub fn into_input(self) -> Option<Input> {
        match self {
            ClientMessage::Command { text } => Some(Input::Command(text)),
            ClientMessage::Interrupt { kind } => Some(Input::Interrupt(kind)),
            ClientMessage::ConfigSet { pause_delay_s } => Some(Input::ConfigSet(ConfigOverride {
                pause_delay_s: Some(pause_delay_s),
            })),
            ClientMessage::Snapshot => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorReason {
    /// The message was not valid JSON or did not match any client type.
    Schema,
    /// The session is no longer running.
    Unavailable,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot {
        seq: u64,
        t_ms: u64,
        protocol: u32,
        state: Box<Snapshot>,
    },
    Event {
        seq: u64,
        t_ms: u64,
        event: SessionEvent,
    },
    Report {
        seq: u64,
        t_ms: u64,
        report: SafetyReport,
        raw_code: String,
        code: Option<String>,
    },
    Error {
        reason: ErrorReason,
        detail: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }

    pub fn error(reason: ErrorReason, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            reason,
            detail: detail.into(),
        }
    }
}

impl From<&Outbound> for ServerMessage {
    fn from(o: &Outbound) -> Self {
        let (seq, t_ms) = (o.seq, o.t_ms);
        match &o.body {
            OutboundBody::Snapshot(s) => ServerMessage::Snapshot {
                seq,
                t_ms,
                protocol: PROTOCOL_VERSION,
                state: s.clone(),
            },
            OutboundBody::Event(e) => ServerMessage::Event {
                seq,
                t_ms,
                event: e.clone(),
            },
            OutboundBody::Report(r) => ServerMessage::Report {
                seq,
                t_ms,
                report: r.report.clone(),
                raw_code: r.raw_code.clone(),
                code: r.code.clone(),
            },
        }
    }
}

/// Parse one client frame. Any failure becomes a schema error message.
#[allow(clippy::result_large_err)]
pub fn decode_client(text: &str) -> Result<ClientMessage, ServerMessage> {
    serde_json::from_str(text).map_err(|e| ServerMessage::error(ErrorReason::Schema, e.to_string()))
}
