use crate::speech::{normalize, KeywordWake};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterruptIntent {
    Stop,
    Pause,
    Resume,
}

/// Recognise a bare stop/pause/resume utterance, optionally prefixed by the
/// wake phrase or the robot's name. Anything longer goes to the model.
pub fn match_interrupt_keyword(text: &str, wake: &KeywordWake) -> Option<InterruptIntent> {
    let stripped = wake.strip(text).unwrap_or(text);
    let norm = normalize(stripped);
    let word = norm.strip_prefix("obi ").unwrap_or(&norm);
    match word {
        "stop" => Some(InterruptIntent::Stop),
        "pause" | "wait" => Some(InterruptIntent::Pause),
        "start" | "resume" | "continue" | "go" => Some(InterruptIntent::Resume),
        _ => None,
    }
}
