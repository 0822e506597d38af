use std::io::{self, BufReader};
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use logichart_core::logichart::DiagramConfig;
use logichart_core::session::{Host, ProtocolMessage};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::framing::{read_frame, write_frame};
use crate::handle_text;

const INDEX: &str = include_str!("../assets/index.html");

#[derive(Clone)]
struct AppState {
    config: DiagramConfig,
}

/// Routes: `/session` (WebSocket), `/healthz`, and the UI at `/`.
pub fn router(config: DiagramConfig, assets: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/session", get(session))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(AppState { config });
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(INDEX) })),
    }
}

async fn session(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state.config))
}

/// One client, one [`Host`]. Requests are handled in arrival order, each on a
/// blocking thread so a long `Run` does not stall other connections.
async fn connection(mut socket: WebSocket, config: DiagramConfig) {
    let mut host = Some(Host::new(config));
    tracing::info!("session opened");
    while let Some(Ok(message)) = socket.recv().await {
        let text = match message {
            Message::Text(text) => text.to_string(),
            Message::Binary(bytes) => match String::from_utf8(bytes.to_vec()) {
                Ok(text) => text,
                Err(_) => {
                    let _ = send(&mut socket, &ProtocolMessage::error("binary frames must be UTF-8 JSON")).await;
                    continue;
                }
            },
            Message::Close(_) => break,
            _ => continue,
        };
        let mut h = host.take().expect("host is returned after every request");
        let (h, responses) = match tokio::task::spawn_blocking(move || {
            let out = handle_text(&mut h, &text);
            (h, out)
        })
        .await
        {
            Ok(done) => done,
            Err(e) => {
                tracing::error!("request handler panicked: {e}");
                break;
            }
        };
        host = Some(h);
        for response in &responses {
            if send(&mut socket, response).await.is_err() {
                tracing::info!("session closed by peer");
                return;
            }
        }
    }
    tracing::info!("session closed");
}

async fn send(socket: &mut WebSocket, message: &ProtocolMessage) -> Result<(), axum::Error> {
    let text = serde_json::to_string(message).expect("protocol messages serialize");
    socket.send(Message::Text(text.into())).await
}

/// Binds `addr`. A port already in use is reported as an error for the caller to map to an exit code.
pub async fn bind(addr: SocketAddr) -> io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

/// Serves until `shutdown` resolves, then lets open connections finish.
pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// Pipe mode: one session over length-prefixed frames on stdin/stdout.
pub fn stdio(config: DiagramConfig) -> io::Result<()> {
    let mut input = BufReader::new(io::stdin().lock());
    let mut output = io::stdout().lock();
    let mut host = Host::new(config);
    while let Some(frame) = read_frame(&mut input)? {
        let responses = match String::from_utf8(frame) {
            Ok(text) => handle_text(&mut host, &text),
            Err(_) => vec![ProtocolMessage::error("frames must be UTF-8 JSON")],
        };
        for response in responses {
            let payload = serde_json::to_vec(&response).expect("protocol messages serialize");
            write_frame(&mut output, &payload)?;
        }
    }
    Ok(())
}
