//! Byte-exact wire transcripts of the scripted sessions in `replays/`.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod common;

use common::*;
use voicepilot_core::wire::ServerMessage;

fn check(name: &str) {
    let path = golden_path(name);
    let actual = render_replay(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(actual == expected, "{name}: wire output drifted from {}", path.display());

    let mut last_seq = 0;
    let mut last_t = 0;
    for line in expected.lines() {
        let msg: ServerMessage = serde_json::from_str(line).unwrap();
        assert_eq!(msg.to_json(), line, "round trip");
        if let ServerMessage::Snapshot { seq, t_ms, .. }
        | ServerMessage::Event { seq, t_ms, .. }
        | ServerMessage::Report { seq, t_ms, .. } = msg
        {
            assert!(seq > last_seq && t_ms >= last_t);
            last_seq = seq;
            last_t = t_ms;
        }
    }
}

#[test]
fn feed_one_bite() {
    check("feed_one_bite");
}

#[test]
fn voice_interrupts() {
    check("voice_interrupts");
}

#[test]
fn rejection_and_config() {
    check("rejection_and_config");
}

#[test]
fn replay_is_deterministic() {
    for name in GOLDEN_SESSIONS {
        assert_eq!(render_replay(name), render_replay(name));
    }
}
