use serde::{Deserialize, Serialize};

use super::{InputItem, InputStream, SpeechError, TimedInput, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    /// Keep the first `max_utterance_ms` of audio.
    Truncate,
    /// Treat an over-long utterance as a capture failure.
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub silence_cutoff_ms: u64,
    pub max_utterance_ms: u64,
    pub overflow: OverflowPolicy,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            silence_cutoff_ms: 1500,
            max_utterance_ms: 15_000,
            overflow: OverflowPolicy::Truncate,
        }
    }
}

/// Incremental endpointing over timed inputs, started right after a wake.
#[derive(Debug, Clone)]
pub struct UtteranceCollector {
    cfg: EndpointConfig,
    started_at: u64,
    audio: Vec<u8>,
    audio_ms: u64,
    waited_ms: u64,
    trailing_silence_ms: u64,
}

impl UtteranceCollector {
    pub fn new(cfg: EndpointConfig, started_at: u64) -> Self {
        Self {
            cfg,
            started_at,
            audio: Vec::new(),
            audio_ms: 0,
            waited_ms: 0,
            trailing_silence_ms: 0,
        }
    }

    fn heard(&self) -> bool {
        !self.audio.is_empty()
    }

    fn finish(&mut self) -> Result<Utterance, SpeechError> {
        if self.heard() {
            Ok(Utterance::audio(std::mem::take(&mut self.audio), self.audio_ms))
        } else {
            Err(SpeechError::Timeout)
        }
    }

    /// Feed one input. Returns `Some` once the utterance is complete.
    pub fn offer(&mut self, input: &TimedInput) -> Option<Result<Utterance, SpeechError>> {
        match &input.item {
            InputItem::Text(text) => {
                if self.heard() {
                    return Some(self.finish());
                }
                if text.trim().is_empty() {
                    Some(Err(SpeechError::Timeout))
                } else {
                    Some(Ok(Utterance::text(text.clone())))
                }
            }
            InputItem::Audio { bytes, duration_ms } => {
                self.trailing_silence_ms = 0;
                let room = self.cfg.max_utterance_ms - self.audio_ms;
                if *duration_ms <= room {
                    self.audio.extend_from_slice(bytes);
                    self.audio_ms += duration_ms;
                    return None;
                }
                match self.cfg.overflow {
                    OverflowPolicy::Timeout => Some(Err(SpeechError::Timeout)),
                    OverflowPolicy::Truncate => {
                        let keep = (bytes.len() as u128 * room as u128 / *duration_ms as u128) as usize;
                        self.audio.extend_from_slice(&bytes[..keep]);
                        self.audio_ms += room;
                        Some(self.finish())
                    }
                }
            }
            InputItem::Silence { duration_ms } => {
                if self.heard() {
                    self.trailing_silence_ms += duration_ms;
                    (self.trailing_silence_ms >= self.cfg.silence_cutoff_ms).then(|| self.finish())
                } else {
                    self.waited_ms += duration_ms;
                    (self.waited_ms >= self.cfg.max_utterance_ms)
                        .then_some(Err(SpeechError::Timeout))
                }
            }
            InputItem::PushToTalk => self.heard().then(|| self.finish()),
        }
    }

    /// Check the wall-clock deadline when no input is arriving.
    pub fn poll(&mut self, now_ms: u64) -> Option<Result<Utterance, SpeechError>> {
        if now_ms.saturating_sub(self.started_at) >= self.cfg.max_utterance_ms {
            Some(self.finish())
        } else {
            None
        }
    }

    /// The stream ended.
    pub fn close(&mut self) -> Result<Utterance, SpeechError> {
        self.finish()
    }
}

/// Block on `stream` until one utterance is captured.
pub fn capture_utterance(
    stream: &mut dyn InputStream,
    cfg: &EndpointConfig,
    started_at: u64,
) -> Result<Utterance, SpeechError> {
    let mut collector = UtteranceCollector::new(*cfg, started_at);
    while let Some(input) = stream.next_input() {
        if let Some(done) = collector.offer(&input) {
            return done;
        }
        if let Some(done) = collector.poll(input.t_ms) {
            return done;
        }
    }
    collector.close()
}
