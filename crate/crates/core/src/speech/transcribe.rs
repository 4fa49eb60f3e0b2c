use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{SpeechError, Transcript, Utterance, UtterancePayload};

pub const STT_URL_ENV: &str = "VP_STT_URL";
pub const STT_TOKEN_ENV: &str = "VP_STT_TOKEN";

const TEXT_BACKEND_ID: &str = "text";

pub trait Transcriber: Send + std::fmt::Debug {
    fn id(&self) -> &str;
    fn transcribe_audio(&self, audio: &[u8], duration_ms: u64) -> Result<Transcript, SpeechError>;
}

/// Transcribe an utterance. Injected text bypasses the backend entirely.
pub fn transcribe(utterance: &Utterance, backend: &dyn Transcriber) -> Result<Transcript, SpeechError> {
    match &utterance.payload {
        UtterancePayload::Text(text) => Ok(Transcript {
            text: text.clone(),
            confidence: 1.0,
            backend_id: TEXT_BACKEND_ID.into(),
        }),
        UtterancePayload::Audio(bytes) => {
            let t = backend.transcribe_audio(bytes, utterance.duration_ms)?;
            if t.text.trim().is_empty() {
                return Err(SpeechError::UnrecognizedAudio);
            }
            Ok(t)
        }
    }
}

/// Short stable identifier for an audio payload: first 8 bytes of SHA-256, hex.
pub fn fingerprint(payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    hex::encode(&digest[..8])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusEntry {
    fingerprint: Option<String>,
    /// Payload given as UTF-8 text; fingerprinted on load.
    payload: Option<String>,
    text: String,
    confidence: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    #[serde(default)]
    entry: Vec<CorpusEntry>,
}

/// Table lookup from payload fingerprint to a fixed transcript.
#[derive(Debug, Clone, Default)]
pub struct MockTranscriber {
    table: HashMap<String, (String, f64)>,
}

impl MockTranscriber {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, fingerprint: impl Into<String>, text: impl Into<String>, confidence: f64) {
        self.table
            .insert(fingerprint.into(), (text.into(), confidence));
    }

    pub fn from_toml(src: &str) -> Result<Self, SpeechError> {
        let file: CorpusFile =
            toml::from_str(src).map_err(|e| SpeechError::Config(format!("mock corpus: {e}")))?;
        let mut mock = Self::new();
        for e in file.entry {
            let fp = match (e.fingerprint, e.payload) {
                (Some(fp), None) => fp,
                (None, Some(payload)) => fingerprint(payload.as_bytes()),
                _ => {
                    return Err(SpeechError::Config(
                        "mock corpus entries need exactly one of fingerprint/payload".into(),
                    ))
                }
            };
            let confidence = e.confidence.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&confidence) {
                return Err(SpeechError::Config(format!(
                    "confidence {confidence} outside [0, 1]"
                )));
            }
            mock.insert(fp, e.text, confidence);
        }
        Ok(mock)
    }

    pub fn load(path: &Path) -> Result<Self, SpeechError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| SpeechError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }
}

impl Transcriber for MockTranscriber {
    fn id(&self) -> &str {
        "mock"
    }

    fn transcribe_audio(&self, audio: &[u8], _duration_ms: u64) -> Result<Transcript, SpeechError> {
        let (text, confidence) = self
            .table
            .get(&fingerprint(audio))
            .ok_or(SpeechError::UnrecognizedAudio)?;
        Ok(Transcript {
            text: text.clone(),
            confidence: *confidence,
            backend_id: self.id().into(),
        })
    }
}

#[derive(Debug, Deserialize)]
struct SttResponse {
    text: String,
    confidence: Option<f64>,
}

/// POSTs the raw payload to an HTTP transcription endpoint and expects
/// `{"text": "...", "confidence": 0.9}` back.
#[derive(Debug)]
pub struct RemoteTranscriber {
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl RemoteTranscriber {
    pub fn new(url: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: url.into(),
            token,
            agent,
        }
    }

    pub fn from_env() -> Result<Self, SpeechError> {
        let url = std::env::var(STT_URL_ENV)
            .map_err(|_| SpeechError::Config(format!("{STT_URL_ENV} is not set")))?;
        let token = std::env::var(STT_TOKEN_ENV).ok();
        Ok(Self::new(url, token, Duration::from_secs(30)))
    }
}

impl Transcriber for RemoteTranscriber {
    fn id(&self) -> &str {
        "remote"
    }

    fn transcribe_audio(&self, audio: &[u8], _duration_ms: u64) -> Result<Transcript, SpeechError> {
        let mut req = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/octet-stream");
        if let Some(token) = &self.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req
            .send(audio)
            .map_err(|e| SpeechError::BackendUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(SpeechError::BackendUnavailable(format!(
                "HTTP {}",
                resp.status()
            )));
        }
        let body: SttResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| SpeechError::BackendUnavailable(format!("bad response: {e}")))?;
        if body.text.trim().is_empty() {
            return Err(SpeechError::UnrecognizedAudio);
        }
        Ok(Transcript {
            text: body.text,
            confidence: body.confidence.unwrap_or(1.0).clamp(0.0, 1.0),
            backend_id: self.id().into(),
        })
    }
}
