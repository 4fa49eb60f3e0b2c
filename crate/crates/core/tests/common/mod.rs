#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use voicepilot_core::clock::VirtualClock;
use voicepilot_core::wire::ServerMessage;
use voicepilot_core::config::Config;
use voicepilot_core::llm::{CompletionBackend, MockLlm, MockRule};
use voicepilot_core::orchestrator::{
    build_session, parse_script, run_script, BackendChoice, CueKind, Outbound, OutboundBody, Session, SessionEvent,
};
use voicepilot_core::sim::ExecutionEvent;

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn shipped_config() -> Config {
    Config::load(&repo_root().join("config/voicepilot.toml")).expect("shipped config loads")
}

pub fn mock_session() -> (Session, VirtualClock) {
    session_with(shipped_config(), None)
}

/// Session on the shipped config, optionally with a replacement LLM.
pub fn session_with(cfg: Config, llm: Option<Box<dyn CompletionBackend>>) -> (Session, VirtualClock) {
    let clock = VirtualClock::new(0);
    let mut parts = build_session(&cfg, BackendChoice::ForceMock).unwrap();
    if let Some(llm) = llm {
        parts.llm = llm;
    }
    let session = Session::new(parts, Arc::new(clock.clone())).unwrap();
    (session, clock)
}

/// An LLM that answers every prompt with `code` in a fenced block.
pub fn fixed_llm(code: &str) -> Box<dyn CompletionBackend> {
    Box::new(MockLlm::new(
        vec![MockRule::new(".*", code).unwrap().fenced()],
        "",
    ))
}

pub fn settle(session: &mut Session, out: &mut Vec<Outbound>) {
    for _ in 0..200_000 {
        if !session.is_busy() {
            break;
        }
        session.tick();
    }
    assert!(!session.is_busy(), "program did not finish");
    out.extend(session.drain());
}

pub fn events(out: &[Outbound]) -> Vec<&SessionEvent> {
    out.iter()
        .filter_map(|o| match &o.body {
            OutboundBody::Event(e) => Some(e),
            _ => None,
        })
        .collect()
}

pub fn cues(out: &[Outbound]) -> Vec<CueKind> {
    events(out)
        .into_iter()
        .filter_map(|e| match e {
            SessionEvent::Cue { cue, .. } => Some(*cue),
            _ => None,
        })
        .collect()
}

pub fn exec_events(out: &[Outbound]) -> Vec<&ExecutionEvent> {
    events(out)
        .into_iter()
        .filter_map(|e| match e {
            SessionEvent::Exec { event } => Some(event),
            _ => None,
        })
        .collect()
}

pub fn prompts(out: &[Outbound]) -> Vec<&str> {
    events(out)
        .into_iter()
        .filter_map(|e| match e {
            SessionEvent::Prompt { text } => Some(text.as_str()),
            _ => None,
        })
        .collect()
}

pub const GOLDEN_SESSIONS: [&str; 3] = ["feed_one_bite", "voice_interrupts", "rejection_and_config"];

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.jsonl"))
}

/// Play `replays/<name>.txt` and render the wire messages, one per line.
pub fn render_replay(name: &str) -> String {
    let script = std::fs::read_to_string(repo_root().join(format!("replays/{name}.txt"))).unwrap();
    let steps = parse_script(&script).unwrap();
    let (mut session, clock) = mock_session();
    let mut text = String::new();
    for o in run_script(&mut session, &clock, &steps, 100_000) {
        text.push_str(&ServerMessage::from(&o).to_json());
        text.push('\n');
    }
    text
}
