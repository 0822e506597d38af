use serde::{Deserialize, Serialize};

use crate::address::{NodeAddress, Segment};
use crate::term::{Clause, PredKey, Program};

use super::build::{statically_unifiable, Builder};
use super::{layout, Diagram, NodeJson, NodeKind};

/// A database change to mirror in the diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DbChange {
    AssertA(Clause),
    AssertZ(Clause),
    Retract(Clause),
}

/// New and moved node geometry for an incremental redraw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePosition {
    pub address: NodeAddress,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramPatch {
    /// Nodes inserted by an assert, in depth-first order, already positioned.
    pub added: Vec<NodeJson>,
    /// Clause heads newly crossed out by a retract.
    pub crossed: Vec<NodeAddress>,
    /// Pre-existing nodes whose position changed.
    pub moved: Vec<NodePosition>,
}

impl DiagramPatch {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.crossed.is_empty() && self.moved.is_empty()
    }
}

/// Applies a database change to a positioned diagram. `program` is the
/// database after the change; it supplies the clauses that the new clause's
/// body goals expand into.
///
/// An assert adds the new clause under every user goal of that predicate whose
/// goal unifies with the clause head, on top for `asserta` and at the bottom
/// for `assertz`, then lays the whole diagram out again. A retract only marks
/// the clause's heads as crossed out; nothing moves.
pub fn apply_patch(d: &Diagram, program: &Program, change: &DbChange) -> (Diagram, DiagramPatch) {
    let mut next = d.clone();
    let mut patch = DiagramPatch::default();
    match change {
        DbChange::AssertA(clause) | DbChange::AssertZ(clause) => {
            let front = matches!(change, DbChange::AssertA(_));
            let key = clause.key();
            let callers: Vec<NodeAddress> = d
                .preorder()
                .into_iter()
                .filter(|n| {
                    n.kind == NodeKind::UserGoal
                        && n.term.indicator().as_ref() == Some(&key)
                        && statically_unifiable(&n.term, &clause.head)
                })
                .map(|n| n.address.clone())
                .collect();
            if callers.is_empty() {
                return (next, patch);
            }
            let mut added = Vec::new();
            for caller in callers {
                let mut ancestors = ancestor_keys(&next, &caller);
                let address = caller.alt(clause.id);
                if next.contains(&address) {
                    continue;
                }
                let mut builder = Builder { program, diagram: &mut next };
                builder.expand_clause(clause, address.clone(), &mut ancestors);
                let goal = next.nodes_mut().get_mut(&caller).unwrap();
                if front {
                    goal.vertical.insert(0, address.clone());
                } else {
                    goal.vertical.push(address.clone());
                }
                added.push(address);
            }
            next = layout(next);
            let new_nodes: Vec<NodeAddress> =
                next.preorder().into_iter().filter(|n| !d.contains(&n.address)).map(|n| n.address.clone()).collect();
            let json = next.to_json();
            patch.added = json.nodes.into_iter().filter(|n| new_nodes.contains(&n.address)).collect();
            patch.moved = next
                .preorder()
                .into_iter()
                .filter_map(|n| {
                    let old = d.node(&n.address)?;
                    (old.x != n.x || old.y != n.y).then(|| NodePosition { address: n.address.clone(), x: n.x, y: n.y })
                })
                .collect();
            debug_assert!(added.iter().all(|a| new_nodes.contains(a)));
        }
        DbChange::Retract(clause) => {
            for node in next.nodes_mut().values_mut() {
                if node.kind == NodeKind::ClauseHead
                    && node.address.last() == Some(Segment::Alt(clause.id))
                    && !node.retracted
                {
                    node.retracted = true;
                    patch.crossed.push(node.address.clone());
                }
            }
        }
    }
    (next, patch)
}

/// Predicates heading the clauses on the path to `address`, root included.
fn ancestor_keys(d: &Diagram, address: &NodeAddress) -> Vec<PredKey> {
    address
        .prefixes()
        .filter_map(|a| d.node(&a))
        .filter(|n| matches!(n.kind, NodeKind::Root | NodeKind::ClauseHead))
        .filter_map(|n| n.term.indicator())
        .collect()
}
