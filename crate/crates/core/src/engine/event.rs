use serde::{Deserialize, Serialize};

use crate::address::NodeAddress;
use crate::term::ClauseId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Call,
    Exit,
    Fail,
    Redo,
    CutPrune,
    DbAssertA,
    DbAssertZ,
    DbRetract,
    Output,
    SolutionFound,
    PromptBacktrack,
    QueryDone,
}

impl EventKind {
    /// Port events that move a goal or clause head through the box model.
    pub fn is_port(self) -> bool {
        matches!(self, EventKind::Call | EventKind::Exit | EventKind::Fail | EventKind::Redo)
    }

    pub fn is_db_change(self) -> bool {
        matches!(self, EventKind::DbAssertA | EventKind::DbAssertZ | EventKind::DbRetract)
    }
}

/// A variable name and the text of its current value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRef {
    pub id: ClauseId,
    pub text: String,
}

/// One observation of the resolution machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<NodeAddress>,
    /// The goal (or clause head) instance under the current bindings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<Binding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<ClauseRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pruned: Vec<NodeAddress>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    /// Output text for `Output`; a diagnostic for `Fail` and `QueryDone`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl TraceEvent {
    pub(crate) fn new(kind: EventKind) -> Self {
        TraceEvent {
            kind,
            address: None,
            goal: None,
            bindings: Vec::new(),
            clause: None,
            pruned: Vec::new(),
            success: None,
            text: None,
        }
    }

    pub(crate) fn port(kind: EventKind, address: NodeAddress, goal: String, bindings: Vec<Binding>) -> Self {
        TraceEvent { address: Some(address), goal: Some(goal), bindings, ..TraceEvent::new(kind) }
    }
}
