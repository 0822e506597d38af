//! Logichart diagrams.
//!
//! A clause is drawn as one row: its head followed by its body goals, left to
//! right. Under a goal that calls a user predicate, the heads of the clauses
//! it can call are stacked top to bottom in database order. The query is the
//! body of an implicit `prolog_program` clause whose head is the root.

mod build;
pub mod invariants;
mod layout;
mod patch;
mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::address::NodeAddress;
use crate::term::Term;

pub use build::{build_and_layout, build_diagram};
pub use layout::layout;
pub use patch::{apply_patch, DbChange, DiagramPatch, NodePosition};
pub use svg::{render_svg, VisualStates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Root,
    ClauseHead,
    UserGoal,
    BuiltinGoal,
    /// A call to a predicate already being expanded on this path; drawn as a leaf.
    RecursiveGoal,
}

/// Monospace text model used to size node boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextMetrics {
    pub char_width: i64,
    pub box_height: i64,
    pub padding: i64,
}

impl TextMetrics {
    pub fn width(&self, label: &str) -> i64 {
        label.chars().count() as i64 * self.char_width + 2 * self.padding
    }
}

impl Default for TextMetrics {
    fn default() -> Self {
        TextMetrics { char_width: 8, box_height: 24, padding: 8 }
    }
}

/// Origin and sibling gaps, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spacing {
    pub root_x: i64,
    pub root_y: i64,
    pub gap_x: i64,
    pub gap_y: i64,
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing { root_x: 10, root_y: 10, gap_x: 20, gap_y: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiagramConfig {
    pub metrics: TextMetrics,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramNode {
    pub address: NodeAddress,
    pub kind: NodeKind,
    pub label: String,
    /// The goal or head as written in the program.
    pub term: Term,
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
    /// Horizontal extent of the subdiagram rooted here.
    pub subtree_width: i64,
    /// Vertical extent of the subdiagram rooted here.
    pub depth: i64,
    pub retracted: bool,
    /// Body goals, left to right (root and clause heads only).
    pub horizontal: Vec<NodeAddress>,
    /// Alternative clause heads, top to bottom (user goals only).
    pub vertical: Vec<NodeAddress>,
}

impl DiagramNode {
    pub fn children(&self) -> impl DoubleEndedIterator<Item = &NodeAddress> {
        self.horizontal.iter().chain(self.vertical.iter())
    }

    pub fn right(&self) -> i64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> i64 {
        self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    nodes: BTreeMap<NodeAddress, DiagramNode>,
    config: DiagramConfig,
    /// Length of the longest node address.
    max_len: usize,
}

impl Diagram {
    pub fn config(&self) -> &DiagramConfig {
        &self.config
    }

    pub fn root(&self) -> &DiagramNode {
        &self.nodes[&NodeAddress::root()]
    }

    pub fn node(&self, address: &NodeAddress) -> Option<&DiagramNode> {
        self.nodes.get(address)
    }

    pub fn contains(&self, address: &NodeAddress) -> bool {
        self.nodes.contains_key(address)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in depth-first order: a node, then its horizontal children, then its alternatives.
    pub fn preorder(&self) -> Vec<&DiagramNode> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![NodeAddress::root()];
        while let Some(addr) = stack.pop() {
            let node = &self.nodes[&addr];
            out.push(node);
            stack.extend(node.children().rev().cloned());
        }
        out
    }

    /// The deepest node whose address is a prefix of `address`.
    pub fn nearest(&self, address: &NodeAddress) -> &DiagramNode {
        // Every prefix of a node's address is a node too, so the answer is the
        // longest prefix present; nothing is longer than the deepest node.
        let mut cur = address.truncate(self.max_len);
        loop {
            if let Some(node) = self.nodes.get(&cur) {
                return node;
            }
            cur = cur.parent().expect("the root is always present");
        }
    }

    /// Total drawing size including the origin margin on both sides.
    pub fn extent(&self) -> (i64, i64) {
        let root = self.root();
        let s = self.config.spacing;
        (s.root_x * 2 + root.subtree_width, s.root_y * 2 + root.depth)
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            nodes: self
                .preorder()
                .into_iter()
                .map(|n| NodeJson {
                    address: n.address.clone(),
                    kind: n.kind,
                    label: n.label.clone(),
                    x: n.x,
                    y: n.y,
                    w: n.width,
                    h: n.height,
                    retracted: n.retracted,
                })
                .collect(),
            constants: Constants::from(self.config),
        }
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut BTreeMap<NodeAddress, DiagramNode> {
        &mut self.nodes
    }
}

/// Wire form of a node. Edges are implied: a node's children are the nodes
/// whose address extends its own by one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub address: NodeAddress,
    pub kind: NodeKind,
    pub label: String,
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub retracted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub root_x: i64,
    pub root_y: i64,
    pub gap_x: i64,
    pub gap_y: i64,
    pub char_width: i64,
    pub padding: i64,
    pub box_height: i64,
}

impl From<DiagramConfig> for Constants {
    fn from(c: DiagramConfig) -> Self {
        Constants {
            root_x: c.spacing.root_x,
            root_y: c.spacing.root_y,
            gap_x: c.spacing.gap_x,
            gap_y: c.spacing.gap_y,
            char_width: c.metrics.char_width,
            padding: c.metrics.padding,
            box_height: c.metrics.box_height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub nodes: Vec<NodeJson>,
    pub constants: Constants,
}
