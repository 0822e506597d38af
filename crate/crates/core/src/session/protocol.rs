use serde::{Deserialize, Serialize};

use crate::address::NodeAddress;
use crate::engine::Binding;
use crate::logichart::{DiagramJson, DiagramPatch};

use super::VisualState;

/// Requests and events exchanged with a client, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProtocolMessage {
    // requests
    LoadProgram {
        text: String,
    },
    SetQuery {
        text: String,
    },
    Step,
    Run,
    /// `success: true` asks for more solutions.
    AnswerBacktrack {
        success: bool,
    },
    GetDiagram,
    Reset,

    // responses and events
    DiagramFull(DiagramJson),
    NodeState {
        address: NodeAddress,
        state: VisualState,
    },
    DiagramPatch {
        patch: DiagramPatch,
    },
    Bindings {
        address: NodeAddress,
        vars: Vec<Binding>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
    },
    OutputText {
        text: String,
    },
    PromptBacktrack {
        vars: Vec<Binding>,
    },
    Done {
        success: bool,
        solutions: usize,
    },
    Error {
        message: String,
    },
    /// Acknowledges a request that produced nothing else, such as loading a
    /// program before any query is set.
    Ack,
}

impl ProtocolMessage {
    pub fn is_request(&self) -> bool {
        use ProtocolMessage::*;
        matches!(self, LoadProgram { .. } | SetQuery { .. } | Step | Run | AnswerBacktrack { .. } | GetDiagram | Reset)
    }

    pub fn error(message: impl Into<String>) -> Self {
        ProtocolMessage::Error { message: message.into() }
    }
}
