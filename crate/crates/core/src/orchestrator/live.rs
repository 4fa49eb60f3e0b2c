//! Runs a session on its own thread. Everything else talks to it through a
//! channel: inputs in, outbound messages broadcast to subscribers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::thread::JoinHandle;
use std::time::Duration;

use super::{Input, Outbound, Session};
use crate::wire::ServerMessage;

#[derive(Debug)]
pub enum LiveRequest {
    Input(Input),
    /// Emit a fresh snapshot to every subscriber.
    Snapshot,
    Subscribe(Sender<Outbound>),
    Shutdown,
}

/// Client side of a running session.
#[derive(Debug)]
pub struct LiveHandle {
    tx: Sender<LiveRequest>,
    join: Option<JoinHandle<()>>,
}

impl Clone for LiveHandle {
    fn clone(&self) -> Self {
        Self {
            tx: self.tx.clone(),
            join: None,
        }
    }
}

impl LiveHandle {
    /// Returns false once the session thread has exited.
    pub fn send(&self, input: Input) -> bool {
        self.tx.send(LiveRequest::Input(input)).is_ok()
    }

    pub fn request_snapshot(&self) -> bool {
        self.tx.send(LiveRequest::Snapshot).is_ok()
    }

    /// Subscribe to everything emitted from now on. A snapshot follows
    /// immediately so the subscriber can sync.
    pub fn subscribe(&self) -> Receiver<Outbound> {
        let (tx, rx) = channel();
        let _ = self.tx.send(LiveRequest::Subscribe(tx));
        let _ = self.tx.send(LiveRequest::Snapshot);
        rx
    }

    pub fn sender(&self) -> Sender<LiveRequest> {
        self.tx.clone()
    }

    /// Stop the session thread and wait for it.
    pub fn shutdown(mut self) {
        let _ = self.tx.send(LiveRequest::Shutdown);
        if let Some(j) = self.join.take() {
            let _ = j.join();
        }
    }
}

struct Runner {
    session: Session,
    subscribers: Vec<Sender<Outbound>>,
    log: Option<BufWriter<File>>,
}

impl Runner {
    /// Returns false on shutdown.
    fn apply(&mut self, req: LiveRequest) -> bool {
        match req {
            LiveRequest::Input(input) => self.session.handle_input(input),
            LiveRequest::Snapshot => self.session.request_snapshot(),
            LiveRequest::Subscribe(tx) => self.subscribers.push(tx),
            LiveRequest::Shutdown => return false,
        }
        true
    }

    fn flush(&mut self) {
        let out = self.session.drain();
        if out.is_empty() {
            return;
        }
        if let Some(log) = self.log.as_mut() {
            for o in &out {
                let line = ServerMessage::from(o).to_json();
                if writeln!(log, "{line}").is_err() {
                    self.log = None;
                    break;
                }
            }
            if let Some(log) = self.log.as_mut() {
                let _ = log.flush();
            }
        }
        self.subscribers
            .retain(|s| out.iter().all(|o| s.send(o.clone()).is_ok()));
    }

    fn run(mut self, rx: Receiver<LiveRequest>, idle_poll: Duration) {
        // Whatever the session emitted before anyone subscribed goes to the log only.
        self.flush();
        loop {
            if self.session.is_busy() {
                loop {
                    match rx.try_recv() {
                        Ok(req) => {
                            if !self.apply(req) {
                                return;
                            }
                        }
                        Err(TryRecvError::Empty) => break,
                        Err(TryRecvError::Disconnected) => return,
                    }
                }
                self.session.tick();
            } else {
                match rx.recv_timeout(idle_poll) {
                    Ok(req) => {
                        if !self.apply(req) {
                            return;
                        }
                    }
                    Err(RecvTimeoutError::Timeout) => self.session.poll_capture(),
                    Err(RecvTimeoutError::Disconnected) => return,
                }
            }
            self.flush();
        }
    }
}

/// Move `session` onto a worker thread. If `log` is given, every outbound
/// message is appended to it as one JSON line.
pub fn spawn_live(session: Session, log: Option<File>) -> LiveHandle {
    let (tx, rx) = channel();
    let idle_poll = Duration::from_millis(session.tick_ms());
    let runner = Runner {
        session,
        subscribers: Vec::new(),
        log: log.map(BufWriter::new),
    };
    let join = std::thread::Builder::new()
        .name("voicepilot-session".into())
        .spawn(move || runner.run(rx, idle_poll))
        .expect("spawn session thread");
    LiveHandle {
        tx,
        join: Some(join),
    }
}
