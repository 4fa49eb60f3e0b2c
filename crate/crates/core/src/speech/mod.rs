//! Wake detection, utterance capture and transcription.
//!
//! Audio is opaque bytes here. Wake detection works on injected text or a
//! push-to-talk signal; transcription goes through a [`Transcriber`].

mod capture;
mod transcribe;
mod wake;

use serde::{Deserialize, Serialize};

pub use capture::{capture_utterance, EndpointConfig, OverflowPolicy, UtteranceCollector};
pub use transcribe::{
    fingerprint, transcribe, MockTranscriber, RemoteTranscriber, Transcriber, STT_TOKEN_ENV,
    STT_URL_ENV,
};
pub use wake::{
    detect_wake, normalize, AlwaysOnWake, KeywordWake, PushToTalkWake, WakeDetector,
    WakeListener, WakeMatch, DEFAULT_WAKE_PHRASE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WakeSource {
    Keyword,
    PushToTalk,
    TextInjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WakeEvent {
    pub timestamp: u64,
    pub source: WakeSource,
}

/// Raw input as it arrives from the microphone, a push-to-talk button or
/// a text box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputItem {
    Text(String),
    PushToTalk,
    Audio { bytes: Vec<u8>, duration_ms: u64 },
    Silence { duration_ms: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedInput {
    pub t_ms: u64,
    pub item: InputItem,
}

impl TimedInput {
    pub fn text(t_ms: u64, text: impl Into<String>) -> Self {
        Self {
            t_ms,
            item: InputItem::Text(text.into()),
        }
    }
}

/// Source of timed inputs. `None` means the stream is closed.
pub trait InputStream {
    fn next_input(&mut self) -> Option<TimedInput>;
}

impl<I: Iterator<Item = TimedInput>> InputStream for I {
    fn next_input(&mut self) -> Option<TimedInput> {
        self.next()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UtterancePayload {
    Audio(Vec<u8>),
    Text(String),
}

/// A captured command: either audio to transcribe or injected text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub payload: UtterancePayload,
    pub duration_ms: u64,
}

impl Utterance {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            payload: UtterancePayload::Text(text.into()),
            duration_ms: 0,
        }
    }

    pub fn audio(bytes: Vec<u8>, duration_ms: u64) -> Self {
        Self {
            payload: UtterancePayload::Audio(bytes),
            duration_ms,
        }
    }

    pub fn text_hint(&self) -> Option<&str> {
        match &self.payload {
            UtterancePayload::Text(t) => Some(t),
            UtterancePayload::Audio(_) => None,
        }
    }

    pub fn audio_bytes(&self) -> Option<&[u8]> {
        match &self.payload {
            UtterancePayload::Audio(a) => Some(a),
            UtterancePayload::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub text: String,
    pub confidence: f64,
    pub backend_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpeechError {
    #[error("input stream closed before a wake trigger")]
    StreamClosed,
    #[error("no speech within the capture window")]
    Timeout,
    #[error("transcription backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend returned no transcript")]
    UnrecognizedAudio,
    #[error("speech configuration: {0}")]
    Config(String),
}
