use std::collections::BTreeMap;
use std::fmt::Write;

use crate::address::NodeAddress;
use crate::session::VisualState;

use super::{Diagram, DiagramNode, NodeKind};

/// Per-node visual states; missing nodes are drawn untouched.
pub type VisualStates = BTreeMap<NodeAddress, VisualState>;

const FONT: &str = "font-family=\"monospace\" font-size=\"13\"";

/// Renders a positioned diagram as a standalone SVG document.
///
/// Connectors are drawn first so boxes sit on top of them. The output depends
/// only on the diagram and the states, never on iteration order of hash maps.
pub fn render_svg(d: &Diagram, states: &VisualStates) -> String {
    let (width, height) = d.extent();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    out.push_str("<g class=\"connectors\" stroke=\"black\" stroke-width=\"1\">\n");
    for node in d.preorder() {
        connectors(d, node, &mut out);
    }
    out.push_str("</g>\n");
    for node in d.preorder() {
        let state = states.get(&node.address).copied().unwrap_or_default();
        draw_node(node, state, d.config.metrics.padding, &mut out);
    }
    out.push_str("</svg>\n");
    out
}

fn connectors(d: &Diagram, node: &DiagramNode, out: &mut String) {
    let mid = node.y + node.height / 2;
    let mut left = node.right();
    for child in &node.horizontal {
        let c = &d.nodes[child];
        let _ = writeln!(out, "<line x1=\"{left}\" y1=\"{mid}\" x2=\"{}\" y2=\"{mid}\"/>", c.x);
        left = c.x + c.width;
    }
    if let Some(last) = node.vertical.last() {
        let last = &d.nodes[last];
        let _ = writeln!(out, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>", node.x, node.bottom(), last.y);
    }
}

fn draw_node(node: &DiagramNode, state: VisualState, padding: i64, out: &mut String) {
    let DiagramNode { x, y, width: w, height: h, .. } = *node;
    let kind = kind_class(node.kind);
    let _ = writeln!(
        out,
        "<g class=\"node {kind} {}\" data-address=\"{}\">",
        state.as_str(),
        escape(&node.address.to_string())
    );
    let fill = state.fill();
    match node.kind {
        NodeKind::Root | NodeKind::ClauseHead => {
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" rx=\"8\" ry=\"8\" fill=\"{fill}\" stroke=\"black\"/>"
            );
        }
        NodeKind::UserGoal => {
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{fill}\" stroke=\"black\"/>"
            );
        }
        NodeKind::BuiltinGoal => {
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{fill}\" stroke=\"black\"/>"
            );
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
                x + 3,
                y + 3,
                w - 6,
                h - 6
            );
        }
        NodeKind::RecursiveGoal => {
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{fill}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>"
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" {FONT} dominant-baseline=\"middle\">{}</text>",
        x + padding,
        y + h / 2,
        escape(&node.label)
    );
    if node.retracted {
        let _ = writeln!(
            out,
            "<line class=\"cross\" x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            x + w,
            y + h
        );
        let _ = writeln!(
            out,
            "<line class=\"cross\" x1=\"{x}\" y1=\"{}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>",
            y + h,
            x + w
        );
    }
    out.push_str("</g>\n");
}

fn kind_class(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Root => "root",
        NodeKind::ClauseHead => "head",
        NodeKind::UserGoal => "goal",
        NodeKind::BuiltinGoal => "builtin",
        NodeKind::RecursiveGoal => "recursive",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
