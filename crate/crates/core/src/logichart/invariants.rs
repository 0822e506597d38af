//! Geometry checks for positioned diagrams.
//!
//! These work from the drawn boxes alone: subdiagram extents are recomputed as
//! bounding boxes rather than read back from the layout pass, so a bug in the
//! layout's bookkeeping cannot hide itself.

use std::collections::BTreeMap;
use std::fmt;

use crate::address::NodeAddress;

use super::{Diagram, DiagramNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Origin,
    NoOverlap,
    HorizontalAlignment,
    VerticalAlignment,
    Order,
    GapX,
    GapY,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.rule, self.detail)
    }
}

/// Returns every violated layout rule; an empty result means the layout is valid.
pub fn check(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |rule, detail: String| out.push(Violation { rule, detail });
    let s = d.config().spacing;
    let nodes = d.preorder();
    let root = d.root();
    if (root.x, root.y) != (s.root_x, s.root_y) {
        fail(Rule::Origin, format!("root at ({}, {})", root.x, root.y));
    }

    let mut bounds = BTreeMap::new();
    bbox(d, root, &mut bounds);

    for node in &nodes {
        let mut prev_right = node.right();
        let mut prev_x = node.x;
        for child in &node.horizontal {
            let c = d.node(child).unwrap();
            if c.y != node.y {
                fail(Rule::HorizontalAlignment, format!("{} at y={} in row y={}", c.address, c.y, node.y));
            }
            if c.x <= prev_x {
                fail(Rule::Order, format!("{} not right of its left sibling", c.address));
            }
            if c.x != prev_right + s.gap_x {
                fail(Rule::GapX, format!("{} starts {} after previous subdiagram", c.address, c.x - prev_right));
            }
            prev_x = c.x;
            prev_right = bounds[child].0;
        }
        let mut prev_bottom = node.bottom();
        let mut prev_y = node.y;
        for alt in &node.vertical {
            let a = d.node(alt).unwrap();
            if a.x != node.x {
                fail(Rule::VerticalAlignment, format!("{} at x={} under goal x={}", a.address, a.x, node.x));
            }
            if a.y <= prev_y {
                fail(Rule::Order, format!("{} not below its previous alternative", a.address));
            }
            if a.y != prev_bottom + s.gap_y {
                fail(Rule::GapY, format!("{} starts {} below previous subdiagram", a.address, a.y - prev_bottom));
            }
            prev_y = a.y;
            prev_bottom = bounds[alt].1;
        }
    }

    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if overlaps(a, b) {
                fail(Rule::NoOverlap, format!("{} and {}", a.address, b.address));
            }
        }
    }
    out
}

/// Right and bottom edge of the subdiagram rooted at `node`.
fn bbox(d: &Diagram, node: &DiagramNode, out: &mut BTreeMap<NodeAddress, (i64, i64)>) -> (i64, i64) {
    let mut edge = (node.right(), node.bottom());
    for child in node.children() {
        let (r, b) = bbox(d, d.node(child).unwrap(), out);
        edge = (edge.0.max(r), edge.1.max(b));
    }
    out.insert(node.address.clone(), edge);
    edge
}

fn overlaps(a: &DiagramNode, b: &DiagramNode) -> bool {
    a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom()
}
