//! WebSocket transport: `GET /ws` upgrades to the JSON message protocol.

use std::net::SocketAddr;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

use crate::error::SessionError;
use crate::manager::{CreateRequest, Outbox, SessionManager};
use crate::protocol::{ClientMessage, ServerMessage};

pub const DEFAULT_PORT: u16 = 8765;
/// Environment variable overriding [`DEFAULT_PORT`].
pub const PORT_ENV: &str = "PURSUIT_PORT";

/// Port from `PURSUIT_PORT`, falling back to [`DEFAULT_PORT`].
pub fn port_from_env() -> u16 {
    std::env::var(PORT_ENV)
        .ok()
        .and_then(|p| p.parse().ok())
        .unwrap_or(DEFAULT_PORT)
}

pub fn router(manager: SessionManager) -> Router {
    Router::new().route("/ws", get(upgrade)).with_state(manager)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, manager: SessionManager) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        log::info!("listening on ws://{addr}/ws");
    }
    axum::serve(listener, router(manager)).await
}

pub async fn bind_and_serve(addr: SocketAddr, manager: SessionManager) -> std::io::Result<()> {
    serve(TcpListener::bind(addr).await?, manager).await
}

async fn upgrade(State(manager): State<SessionManager>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| connection(socket, manager))
}

async fn connection(socket: WebSocket, manager: SessionManager) {
    let (mut sink, mut stream) = socket.split();
    let (outbox, mut queue) = mpsc::unbounded_channel::<ServerMessage>();

    let writer = tokio::spawn(async move {
        while let Some(msg) = queue.recv().await {
            let text = match serde_json::to_string(&msg) {
                Ok(t) => t,
                Err(e) => {
                    log::error!("failed to encode {msg:?}: {e}");
                    continue;
                }
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(text) => dispatch(&manager, text.as_str(), &outbox),
            Message::Close(_) => break,
            _ => {}
        }
    }
    // dropping the last sender stops the writer; session tasks holding a
    // clone notice the closed queue and wind down
    drop(outbox);
    writer.abort();
}

fn dispatch(manager: &SessionManager, text: &str, outbox: &Outbox) {
    let msg: ClientMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => {
            let _ = outbox.send(SessionError::Invalid(format!("malformed message: {e}")).to_message(None));
            return;
        }
    };
    let outcome = match msg {
        ClientMessage::Create {
            pursuer,
            seed,
            tick_ms,
            clock,
            config,
        } => manager
            .create(
                CreateRequest {
                    pursuer,
                    seed,
                    tick_ms,
                    clock,
                    config,
                },
                outbox.clone(),
            )
            .map(|_| ())
            .map_err(|e| (e, None)),
        ClientMessage::Control { session, v, omega } => manager
            .control(session, v, omega, outbox.clone())
            .map_err(|e| (e, Some(session))),
        ClientMessage::Step { session } => manager.step(session, outbox.clone()).map_err(|e| (e, Some(session))),
    };
    if let Err((e, session)) = outcome {
        let _ = outbox.send(e.to_message(session));
    }
}
