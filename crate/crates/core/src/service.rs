//! WebSocket front end for a live session. Each connection gets its own
//! thread; all of them talk to the session through its channel.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::TryRecvError;
use std::thread::JoinHandle;
use std::time::Duration;

use tungstenite::{Message, WebSocket};

use crate::orchestrator::{LiveHandle, LiveRequest};
use crate::wire::{decode_client, ClientMessage, ErrorReason, ServerMessage};

const POLL: Duration = Duration::from_millis(10);

#[derive(Debug, thiserror::Error)]
#[error("cannot bind {addr}: {source}")]
pub struct BindError {
    pub addr: String,
    pub source: std::io::Error,
}

#[derive(Debug)]
pub struct WireServer {
    listener: TcpListener,
    live: LiveHandle,
}

impl WireServer {
    pub fn bind(addr: impl ToSocketAddrs + std::fmt::Debug, live: LiveHandle) -> Result<Self, BindError> {
        let listener = TcpListener::bind(&addr).map_err(|source| BindError {
            addr: format!("{addr:?}"),
            source,
        })?;
        Ok(Self { listener, live })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    /// Accept connections forever.
    pub fn serve(self) {
        for stream in self.listener.incoming() {
            let Ok(stream) = stream else { continue };
            let live = self.live.clone();
            let _ = std::thread::Builder::new()
                .name("voicepilot-client".into())
                .spawn(move || {
                    if let Ok(ws) = tungstenite::accept(stream) {
                        connection(ws, live);
                    }
                });
        }
    }

    pub fn spawn(self) -> JoinHandle<()> {
        std::thread::spawn(move || self.serve())
    }
}

fn send(ws: &mut WebSocket<TcpStream>, msg: &ServerMessage) -> bool {
    ws.send(Message::text(msg.to_json())).is_ok()
}

fn connection(mut ws: WebSocket<TcpStream>, live: LiveHandle) {
    if ws.get_ref().set_read_timeout(Some(POLL)).is_err() {
        return;
    }
    let updates = live.subscribe();
    let session = live.sender();
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                let reply = match decode_client(&text) {
                    Ok(ClientMessage::Snapshot) => session.send(LiveRequest::Snapshot).err().map(|_| ()),
                    Ok(msg) => {
                        let input = msg.into_input().expect("non-snapshot messages carry input");
                        session.send(LiveRequest::Input(input)).err().map(|_| ())
                    }
                    Err(err) => {
                        if !send(&mut ws, &err) {
                            return;
                        }
                        None
                    }
                };
                if reply.is_some() {
                    let _ = send(&mut ws, &ServerMessage::error(ErrorReason::Unavailable, "session ended"));
                    return;
                }
            }
            Ok(Message::Binary(_)) => {
                let err = ServerMessage::error(ErrorReason::Schema, "binary frames are not supported");
                if !send(&mut ws, &err) {
                    return;
                }
            }
            Ok(Message::Close(_)) => return,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => return,
        }
        loop {
            match updates.try_recv() {
                Ok(o) => {
                    if !send(&mut ws, &ServerMessage::from(&o)) {
                        return;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = send(&mut ws, &ServerMessage::error(ErrorReason::Unavailable, "session ended"));
                    let _ = ws.close(None);
                    return;
                }
            }
        }
    }
}
