use crate::address::NodeAddress;

use super::{Diagram, NodeKind};

/// Assigns coordinates to every node.
///
/// - The root sits at `(root_x, root_y)`.
/// - A row (root or clause head followed by its body goals) shares one y; each
///   element starts `gap_x` after the previous element's whole subdiagram.
/// - A goal's alternatives share the goal's x; the first starts `gap_y` below
///   the goal's box and each next one `gap_y` below the previous subdiagram.
pub fn layout(mut d: Diagram) -> Diagram {
    let root = NodeAddress::root();
    measure(&mut d, &root);
    let s = d.config.spacing;
    place(&mut d, &root, s.root_x, s.root_y);
    d
}

/// Computes `subtree_width` and `depth` bottom-up.
fn measure(d: &mut Diagram, addr: &NodeAddress) -> (i64, i64) {
    let s = d.config.spacing;
    let node = &d.nodes[addr];
    let (w, h, kind) = (node.width, node.height, node.kind);
    let horizontal = node.horizontal.clone();
    let vertical = node.vertical.clone();
    let extent = match kind {
        NodeKind::Root | NodeKind::ClauseHead => {
            let mut width = w;
            let mut depth = h;
            for child in &horizontal {
                let (cw, cd) = measure(d, child);
                width += s.gap_x + cw;
                depth = depth.max(cd);
            }
            (width, depth)
        }
        NodeKind::UserGoal => {
            let mut width = w;
            let mut depth = h;
            for alt in &vertical {
                let (aw, ad) = measure(d, alt);
                width = width.max(aw);
                depth += s.gap_y + ad;
            }
            (width, depth)
        }
        NodeKind::BuiltinGoal | NodeKind::RecursiveGoal => (w, h),
    };
    let node = d.nodes.get_mut(addr).unwrap();
    node.subtree_width = extent.0;
    node.depth = extent.1;
    extent
}

fn place(d: &mut Diagram, addr: &NodeAddress, x: i64, y: i64) {
    let s = d.config.spacing;
    let node = d.nodes.get_mut(addr).unwrap();
    node.x = x;
    node.y = y;
    let (w, h) = (node.width, node.height);
    let horizontal = node.horizontal.clone();
    let vertical = node.vertical.clone();
    let mut cx = x + w + s.gap_x;
    for child in &horizontal {
        place(d, child, cx, y);
        cx += d.nodes[child].subtree_width + s.gap_x;
    }
    let mut cy = y + h + s.gap_y;
    for alt in &vertical {
        place(d, alt, x, cy);
        cy += d.nodes[alt].depth + s.gap_y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logichart::{build_diagram, DiagramConfig, Spacing, TextMetrics};
    use crate::term::{parse_program, parse_query};

    fn config() -> DiagramConfig {
        DiagramConfig {
            metrics: TextMetrics { char_width: 8, padding: 8, box_height: 24 },
            spacing: Spacing { root_x: 0, root_y: 0, gap_x: 20, gap_y: 12 },
        }
    }

    fn positioned(program: &str, query: &str) -> Diagram {
        layout(build_diagram(&parse_program(program).unwrap(), &parse_query(query).unwrap(), config()))
    }

    #[test]
    fn first_query_goal_follows_root_label() {
        let d = positioned("p.", "?- p.");
        assert_eq!(d.root().width, 128);
        let first = d.node(&NodeAddress::root().body(0)).unwrap();
        assert_eq!((first.x, first.y), (148, 0));
    }

    #[test]
    fn first_alternative_sits_below_goal() {
        let d = positioned("p.", "?- p.");
        let goal = d.node(&NodeAddress::root().body(0)).unwrap();
        let head = d.node(&goal.vertical[0]).unwrap();
        assert_eq!((head.x, head.y), (goal.x, goal.y + 36));
    }

    #[test]
    fn builtin_only_query_is_one_row() {
        let d = positioned("", "?- write(a), nl, true.");
        assert_eq!(d.len(), 4);
        assert!(d.preorder().iter().all(|n| n.y == 0));
        let xs: Vec<i64> = d.preorder().iter().map(|n| n.x).collect();
        // root 128 wide, write(a) 8*8+16=80, nl 32
        assert_eq!(xs, [0, 148, 248, 300]);
    }

    #[test]
    fn stacked_alternatives_skip_previous_subdiagram() {
        let d = positioned("p :- q.\np.\nq.", "?- p.");
        let p = d.node(&NodeAddress::root().body(0)).unwrap();
        let first = d.node(&p.vertical[0]).unwrap();
        let second = d.node(&p.vertical[1]).unwrap();
        // first alternative: head `p` with goal `q` whose alternative `q` sits one row down
        assert_eq!(first.depth, 24 + 12 + 24);
        assert_eq!(second.y, first.y + first.depth + 12);
        assert_eq!(p.depth, 24 + 12 + first.depth + 12 + 24);
    }
}
