use super::{InputItem, InputStream, SpeechError, TimedInput, WakeEvent, WakeSource};

pub const DEFAULT_WAKE_PHRASE: &str = "hey obi";

/// Lowercase, drop punctuation, collapse whitespace.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WakeMatch {
    pub event: WakeEvent,
    /// Text spoken after the wake phrase in the same input, if any.
    pub remainder: Option<String>,
}

pub trait WakeDetector: Send + std::fmt::Debug {
    fn id(&self) -> &'static str;
    fn offer(&mut self, input: &TimedInput) -> Option<WakeMatch>;
}

/// Matches a wake phrase at the start of injected text, case-insensitively.
#[derive(Debug, Clone)]
pub struct KeywordWake {
    phrase: Vec<String>,
}

impl KeywordWake {
    pub fn new(phrase: &str) -> Result<Self, SpeechError> {
        let words: Vec<String> = normalize(phrase)
            .split(' ')
            .filter(|w| !w.is_empty())
            .map(String::from)
            .collect();
        if words.is_empty() {
            return Err(SpeechError::Config("wake phrase is empty".into()));
        }
        Ok(Self { phrase: words })
    }

    /// If `text` starts with the phrase, return whatever follows it.
    pub fn strip<'a>(&self, text: &'a str) -> Option<&'a str> {
        let mut rest = text.trim_start();
        for want in &self.phrase {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            if normalize(&rest[..end]) != *want {
                return None;
            }
            rest = rest[end..].trim_start();
        }
        Some(rest.trim_start_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace()))
    }
}

impl Default for KeywordWake {
    fn default() -> Self {
        Self::new(DEFAULT_WAKE_PHRASE).expect("default phrase is non-empty")
    }
}

impl WakeDetector for KeywordWake {
    fn id(&self) -> &'static str {
        "keyword"
    }

    fn offer(&mut self, input: &TimedInput) -> Option<WakeMatch> {
        let InputItem::Text(text) = &input.item else {
            return None;
        };
        let rest = self.strip(text)?;
        Some(WakeMatch {
            event: WakeEvent {
                timestamp: input.t_ms,
                source: WakeSource::TextInjection,
            },
            remainder: (!rest.trim().is_empty()).then(|| rest.trim().to_string()),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct PushToTalkWake;

impl WakeDetector for PushToTalkWake {
    fn id(&self) -> &'static str {
        "push_to_talk"
    }

    fn offer(&mut self, input: &TimedInput) -> Option<WakeMatch> {
        matches!(input.item, InputItem::PushToTalk).then_some(WakeMatch {
            event: WakeEvent {
                timestamp: input.t_ms,
                source: WakeSource::PushToTalk,
            },
            remainder: None,
        })
    }
}

/// Treats every input as a wake trigger. Test harnesses only.
#[derive(Debug, Clone, Default)]
pub struct AlwaysOnWake;

impl WakeDetector for AlwaysOnWake {
    fn id(&self) -> &'static str {
        "always_on"
    }

    fn offer(&mut self, input: &TimedInput) -> Option<WakeMatch> {
        let (source, remainder) = match &input.item {
            InputItem::Text(t) => (
                WakeSource::TextInjection,
                (!t.trim().is_empty()).then(|| t.trim().to_string()),
            ),
            InputItem::PushToTalk => (WakeSource::PushToTalk, None),
            InputItem::Audio { .. } => (WakeSource::Keyword, None),
            InputItem::Silence { .. } => return None,
        };
        Some(WakeMatch {
            event: WakeEvent {
                timestamp: input.t_ms,
                source,
            },
            remainder,
        })
    }
}

/// Wraps a detector and keeps wake timestamps non-decreasing.
#[derive(Debug)]
pub struct WakeListener {
    detector: Box<dyn WakeDetector>,
    last: u64,
}

impl WakeListener {
    pub fn new(detector: Box<dyn WakeDetector>) -> Self {
        Self { detector, last: 0 }
    }

    pub fn detector_id(&self) -> &'static str {
        self.detector.id()
    }

    pub fn offer(&mut self, input: &TimedInput) -> Option<WakeMatch> {
        let mut m = self.detector.offer(input)?;
        m.event.timestamp = m.event.timestamp.max(self.last);
        self.last = m.event.timestamp;
        Some(m)
    }
}

/// Block on `stream` until the first wake trigger.
pub fn detect_wake(
    stream: &mut dyn InputStream,
    listener: &mut WakeListener,
) -> Result<WakeMatch, SpeechError> {
    while let Some(input) = stream.next_input() {
        if let Some(m) = listener.offer(&input) {
            return Ok(m);
        }
    }
    Err(SpeechError::StreamClosed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keyword() -> WakeListener {
        WakeListener::new(Box::new(KeywordWake::default()))
    }

    #[test]
    fn hey_obi_any_case() {
        let mut stream = vec![TimedInput::text(10, "HEY Obi")].into_iter();
        let m = detect_wake(&mut stream, &mut keyword()).unwrap();
        assert_eq!(m.event.source, WakeSource::TextInjection);
        assert_eq!(m.event.timestamp, 10);
        assert_eq!(m.remainder, None);
    }

    #[test]
    fn non_matching_phrase_keeps_waiting() {
        let mut stream = vec![
            TimedInput::text(0, "hello there"),
            TimedInput::text(5, "obi hey"),
            TimedInput::text(9, "hey, obi! feed me some yogurt"),
        ]
        .into_iter();
        let m = detect_wake(&mut stream, &mut keyword()).unwrap();
        assert_eq!(m.event.timestamp, 9);
        assert_eq!(m.remainder.as_deref(), Some("feed me some yogurt"));
    }

    #[test]
    fn stream_closed_without_trigger() {
        let mut stream = vec![TimedInput::text(0, "hello there")].into_iter();
        assert_eq!(
            detect_wake(&mut stream, &mut keyword()).unwrap_err(),
            SpeechError::StreamClosed
        );
    }

    #[test]
    fn push_to_talk_passes_through() {
        let mut listener = WakeListener::new(Box::new(PushToTalkWake));
        let mut stream = vec![
            TimedInput::text(0, "hey obi"),
            TimedInput {
                t_ms: 1200,
                item: InputItem::PushToTalk,
            },
        ]
        .into_iter();
        let m = detect_wake(&mut stream, &mut listener).unwrap();
        assert_eq!(
            m.event,
            WakeEvent {
                timestamp: 1200,
                source: WakeSource::PushToTalk
            }
        );
    }

    #[test]
    fn timestamps_never_decrease() {
        let mut listener = WakeListener::new(Box::new(AlwaysOnWake));
        let a = listener.offer(&TimedInput::text(500, "x")).unwrap();
        let b = listener.offer(&TimedInput::text(300, "y")).unwrap();
        assert!(b.event.timestamp >= a.event.timestamp);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Hey,   OBI!! "), "hey obi");
        assert_eq!(KeywordWake::default().strip("Hey Obi, stop."), Some("stop."));
        assert_eq!(KeywordWake::default().strip("hey obiwan"), None);
        assert!(KeywordWake::new("  !! ").is_err());
    }
}
