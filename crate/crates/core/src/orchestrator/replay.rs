//! Scripted sessions on a virtual clock.
//!
//! A script is one input per line, `<t_ms> <verb> [args]`:
//!
//! ```text
//! # comment
//! 0     say hey obi
//! 200   say feed me a bite of bowl 1
//! 4000  interrupt pause
//! 6000  command resume
//! 0     ptt
//! 0     audio 800 <payload>
//! 0     silence 1500
//! 0     config pause_delay_s 6
//! 0     fault spoon_detached
//! ```
//!
//! Times are absolute and must not decrease.

use super::{ConfigOverride, Input, Outbound, Session, UserInterrupt};
use crate::clock::VirtualClock;
use crate::sim::Fault;
use crate::speech::{InputItem, TimedInput};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: time {t_ms} is earlier than the previous step")]
    OutOfOrder { line: usize, t_ms: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptedInput {
    Say(String),
    Command(String),
    Interrupt(UserInterrupt),
    PushToTalk,
    Audio { duration_ms: u64, payload: String },
    Silence(u64),
    PauseDelay(f64),
    Fault(Fault),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptStep {
    pub t_ms: u64,
    pub input: ScriptedInput,
}

impl ScriptStep {
    pub fn to_input(&self) -> Input {
        let timed = |item| Input::Speech(TimedInput { t_ms: self.t_ms, item });
        match &self.input {
            ScriptedInput::Say(text) => timed(InputItem::Text(text.clone())),
            ScriptedInput::Command(text) => Input::Command(text.clone()),
            ScriptedInput::Interrupt(k) => Input::Interrupt(*k),
            ScriptedInput::PushToTalk => timed(InputItem::PushToTalk),
            ScriptedInput::Audio { duration_ms, payload } => timed(InputItem::Audio {
                bytes: payload.as_bytes().to_vec(),
                duration_ms: *duration_ms,
            }),
            ScriptedInput::Silence(ms) => timed(InputItem::Silence { duration_ms: *ms }),
            ScriptedInput::PauseDelay(d) => Input::ConfigSet(ConfigOverride {
                pause_delay_s: Some(*d),
            }),
            ScriptedInput::Fault(f) => Input::Fault(*f),
        }
    }
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim()),
        None => (s, ""),
    }
}

pub fn parse_script(src: &str) -> Result<Vec<ScriptStep>, ReplayError> {
    let mut steps = Vec::new();
    let mut last = 0u64;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |reason: &str| ReplayError::Syntax {
            line,
            reason: reason.into(),
        };
        let (t, rest) = split_word(text);
        let t_ms: u64 = t.parse().map_err(|_| err("expected a time in ms"))?;
        if t_ms < last {
            return Err(ReplayError::OutOfOrder { line, t_ms });
        }
        last = t_ms;
        let (verb, args) = split_word(rest);
        let input = match verb {
            "say" if !args.is_empty() => ScriptedInput::Say(args.into()),
            "command" if !args.is_empty() => ScriptedInput::Command(args.into()),
            "interrupt" => ScriptedInput::Interrupt(match args {
                "stop" => UserInterrupt::Stop,
                "pause" => UserInterrupt::Pause,
                "resume" => UserInterrupt::Resume,
                _ => return Err(err("interrupt kind must be stop, pause or resume")),
            }),
            "ptt" => ScriptedInput::PushToTalk,
            "audio" => {
                let (dur, payload) = split_word(args);
                let duration_ms = dur.parse().map_err(|_| err("expected audio duration"))?;
                if payload.is_empty() {
                    return Err(err("audio needs a payload"));
                }
                ScriptedInput::Audio {
                    duration_ms,
                    payload: payload.into(),
                }
            }
            "silence" => ScriptedInput::Silence(
                args.parse().map_err(|_| err("expected silence duration"))?,
            ),
            "config" => {
                let (key, value) = split_word(args);
                if key != "pause_delay_s" {
                    return Err(err("only pause_delay_s can be configured"));
                }
                ScriptedInput::PauseDelay(value.parse().map_err(|_| err("expected a number"))?)
            }
            "fault" if args == "spoon_detached" => ScriptedInput::Fault(Fault::SpoonDetached),
            _ => return Err(err("unknown or incomplete step")),
        };
        steps.push(ScriptStep { t_ms, input });
    }
    Ok(steps)
}

/// Drive `session` through `steps`. Between steps the executor ticks until
/// it catches up with the next step's time; after the last step it runs
/// for at most `max_ticks` more ticks. Returns everything emitted.
pub fn run_script(
    session: &mut Session,
    clock: &VirtualClock,
    steps: &[ScriptStep],
    max_ticks: usize,
) -> Vec<Outbound> {
    let mut out = session.drain();
    for step in steps {
        while session.is_busy() && session.now_ms() < step.t_ms {
            session.tick();
        }
        clock.set(step.t_ms);
        session.poll_capture();
        session.handle_input(step.to_input());
        out.extend(session.drain());
    }
    for _ in 0..max_ticks {
        if !session.is_busy() {
            break;
        }
        session.tick();
    }
    out.extend(session.drain());
    out
}
