//! Session state machine: wake, capture, transcribe, generate, validate,
//! execute, and back to listening.

mod fast_path;
mod live;
mod replay;
mod session;

use serde::{Deserialize, Serialize};

pub use fast_path::{match_interrupt_keyword, InterruptIntent};
pub use live::{spawn_live, LiveHandle, LiveRequest};
pub use replay::{parse_script, run_script, ReplayError, ScriptStep, ScriptedInput};
pub use session::{build_session, BackendChoice, Session, SessionError, SessionParts};

use crate::dsl::SafetyReport;
use crate::llm::Exchange;
use crate::sim::{ExecutionEvent, Fault, RobotState};
use crate::speech::{TimedInput, WakeSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingWake,
    Capturing,
    Processing,
    Validating,
    Executing,
    Paused,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueKind {
    Beep,
    GotIt,
    Scooping,
    Scraping,
    Ready,
    Busy,
    NoOp,
    Error,
}

impl CueKind {
    pub fn text(self) -> &'static str {
        match self {
            CueKind::Beep => "<beep>",
            CueKind::GotIt => "Got it, processing",
            CueKind::Scooping => "Scooping now",
            CueKind::Scraping => "Scraping now",
            CueKind::Ready => "Ready for another command",
            CueKind::Busy => "I'm busy right now. Say stop or pause to interrupt.",
            CueKind::NoOp => "Nothing is running right now",
            CueKind::Error => "Sorry, I couldn't do that",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackCue {
    pub kind: CueKind,
    pub text: &'static str,
}

impl From<CueKind> for FeedbackCue {
    fn from(kind: CueKind) -> Self {
        Self {
            kind,
            text: kind.text(),
        }
    }
}

/// Renders cues to the user (speaker, terminal, nothing).
pub trait CueSink: Send {
    fn play(&mut self, cue: &FeedbackCue);
}

#[derive(Debug, Default)]
pub struct NullSink;

impl CueSink for NullSink {
    fn play(&mut self, _cue: &FeedbackCue) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserInterrupt {
    Stop,
    Pause,
    Resume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverride {
    pub pause_delay_s: Option<f64>,
}

/// Everything that can drive a session.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Speech(TimedInput),
    /// Typed command: counts as wake plus utterance.
    Command(String),
    Interrupt(UserInterrupt),
    ConfigSet(ConfigOverride),
    Fault(Fault),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionEvent {
    Phase {
        phase: Phase,
    },
    Wake {
        source: WakeSource,
        timestamp: u64,
    },
    Captured {
        duration_ms: u64,
        injected_text: bool,
    },
    Cue {
        cue: CueKind,
        text: String,
    },
    Transcript {
        text: String,
        confidence: f64,
        backend_id: String,
    },
    Prompt {
        text: String,
    },
    FastPath {
        action: String,
    },
    Exec {
        event: ExecutionEvent,
    },
    ConfigChanged {
        pause_delay_s: f64,
    },
    Error {
        stage: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub phase: Phase,
    pub robot: RobotState,
    pub history: Vec<Exchange>,
    pub last_report: Option<SafetyReport>,
    pub pause_delay_s: f64,
    pub llm_calls: u64,
    pub cheat_sheet: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub report: SafetyReport,
    /// Extracted candidate code, before parsing.
    pub raw_code: String,
    /// Pretty-printed validated program, when validation succeeded.
    pub code: Option<String>,
}

/// One message a session emits. `seq` is strictly increasing per session.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub seq: u64,
    pub t_ms: u64,
    pub body: OutboundBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutboundBody {
    Snapshot(Box<Snapshot>),
    Event(SessionEvent),
    Report(ReportView),
}
