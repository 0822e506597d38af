//! The `logichart` command: batch tracing to JSON or SVG, and a server that
//! speaks the session protocol over WebSocket or standard input/output.

pub mod args;
pub mod framing;
pub mod run;
pub mod serve;

use logichart_core::session::{Host, ProtocolMessage};

/// Decodes one request, handles it and returns the responses. Malformed
/// input gets an `Error` response rather than closing the connection.
pub fn handle_text(host: &mut Host, text: &str) -> Vec<ProtocolMessage> {
    match serde_json::from_str::<ProtocolMessage>(text) {
        Ok(request) => host.handle(request),
        Err(e) => vec![ProtocolMessage::error(format!("malformed message: {e}"))],
    }
}
