use serde::{Deserialize, Serialize};

use crate::engine::EventKind;

/// Color of a diagram node during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisualState {
    #[default]
    Untouched,
    Called,
    Succeeded,
    Failed,
    /// An alternative discarded by a cut. Nothing leaves this state.
    Pruned,
}

impl VisualState {
    /// The state a port event moves a node into, or `None` if the transition
    /// is not allowed from `self`.
    ///
    /// A goal that already succeeded or failed is re-entered either by `Redo`
    /// or, when an earlier sibling produced a new answer, by a fresh `Call`.
    pub fn after(self, port: EventKind) -> Option<VisualState> {
        use VisualState::*;
        match (self, port) {
            (Pruned, _) => None,
            (Untouched | Succeeded | Failed, EventKind::Call) => Some(Called),
            (Succeeded | Failed, EventKind::Redo) => Some(Called),
            (Called, EventKind::Exit) => Some(Succeeded),
            (Called, EventKind::Fail) => Some(Failed),
            (_, EventKind::CutPrune) => Some(Pruned),
            _ => None,
        }
    }

    pub fn fill(self) -> &'static str {
        match self {
            VisualState::Untouched => "#ffffff",
            VisualState::Called => "#7ccf7c",
            VisualState::Succeeded => "#7caee8",
            VisualState::Failed => "#ee7c7c",
            VisualState::Pruned => "#b8b8b8",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VisualState::Untouched => "untouched",
            VisualState::Called => "called",
            VisualState::Succeeded => "succeeded",
            VisualState::Failed => "failed",
            VisualState::Pruned => "pruned",
        }
    }
}
