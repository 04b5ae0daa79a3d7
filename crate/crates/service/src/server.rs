//! HTTP side of the replay service: the WebSocket endpoint and the static UI.

use std::future::Future;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use thermsense_core::ThermalSequence;
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tower_http::services::ServeDir;

use crate::protocol::ClientMessage;
use crate::replay::{Command, Driver, ReplayConfig};

/// Path of the WebSocket endpoint.
pub const WS_PATH: &str = "/ws";

const PLACEHOLDER: &str = "<!doctype html>\n<title>thermsense</title>\n<p>No UI bundle is installed. \
Connect a WebSocket client to <code>/ws</code>.</p>\n";

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub replay: ReplayConfig,
    /// Directory holding the built UI; a placeholder page is served without it.
    pub ui_dir: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Command>,
    next_id: Arc<AtomicU64>,
    client_buffer: usize,
}

/// Spawns the replay driver and returns the router that feeds it.
pub fn app(seq: ThermalSequence, cfg: ServeConfig) -> Result<Router, thermsense_core::Error> {
    let driver = Driver::new(Arc::new(seq), cfg.replay)?;
    let (tx, rx) = mpsc::channel(256);
    tokio::spawn(driver.run(rx));
    let state = AppState {
        commands: tx,
        next_id: Arc::new(AtomicU64::new(0)),
        client_buffer: cfg.replay.client_buffer.max(1),
    };
    let router = Router::new().route(WS_PATH, get(upgrade)).with_state(state);
    Ok(match cfg.ui_dir.filter(|d| d.join("index.html").is_file()) {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.route("/", get(|| async { Html(PLACEHOLDER) })),
    })
}

pub async fn serve(
    listener: TcpListener,
    seq: ThermalSequence,
    cfg: ServeConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let router = app(seq, cfg).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

async fn connection(socket: WebSocket, state: AppState) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::channel::<Message>(state.client_buffer);
    if state.commands.send(Command::Join { id, tx }).await.is_err() {
        return;
    }
    // The driver holds the only sender, so dropping this client there closes the socket.
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(msg).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(Ok(msg)) = stream.next().await {
        let cmd = match msg {
            Message::Text(text) => match serde_json::from_str::<ClientMessage>(text.as_str()) {
                Ok(msg) => Command::Client { id, msg },
                Err(e) => Command::Malformed {
                    id,
                    detail: e.to_string(),
                },
            },
            Message::Binary(_) => Command::Malformed {
                id,
                detail: "binary client messages are not accepted".into(),
            },
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if state.commands.send(cmd).await.is_err() {
            break;
        }
    }
    let _ = state.commands.send(Command::Leave { id }).await;
    let _ = writer.await;
}
