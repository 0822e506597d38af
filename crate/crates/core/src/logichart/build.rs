use std::collections::BTreeMap;

use crate::address::NodeAddress;
use crate::engine::{is_builtin, Substitution, QUERY_HEAD};
use crate::term::{format_term, Clause, PredKey, Program, Term, VarId};

use super::{layout, Diagram, DiagramConfig, DiagramNode, NodeKind};

/// Expands a program and query into an unpositioned diagram.
///
/// Each query goal hangs off the root; each user goal gets one alternative per
/// clause whose head unifies with the goal as written. A goal whose predicate
/// already heads a clause on its own ancestor path is cut off as a
/// [`NodeKind::RecursiveGoal`] leaf, which keeps the diagram finite.
pub fn build_diagram(program: &Program, query: &[Term], config: DiagramConfig) -> Diagram {
    let mut diagram = Diagram { nodes: BTreeMap::new(), config, max_len: 0 };
    let root_term = Term::atom(QUERY_HEAD);
    let mut builder = Builder { program, diagram: &mut diagram };
    let root = NodeAddress::root();
    let mut ancestors = vec![root_term.indicator().unwrap()];
    let horizontal =
        query.iter().enumerate().map(|(i, g)| builder.expand_goal(g, root.body(i), &mut ancestors)).collect();
    builder.insert(root, NodeKind::Root, root_term, false, horizontal, Vec::new());
    diagram
}

/// Builds a positioned diagram in one call.
pub fn build_and_layout(program: &Program, query: &[Term], config: DiagramConfig) -> Diagram {
    layout(build_diagram(program, query, config))
}

pub(super) struct Builder<'a> {
    pub program: &'a Program,
    pub diagram: &'a mut Diagram,
}

impl Builder<'_> {
    fn insert(
        &mut self,
        address: NodeAddress,
        kind: NodeKind,
        term: Term,
        retracted: bool,
        horizontal: Vec<NodeAddress>,
        vertical: Vec<NodeAddress>,
    ) -> NodeAddress {
        let label = format_term(&term, true);
        let metrics = self.diagram.config.metrics;
        let node = DiagramNode {
            address: address.clone(),
            kind,
            width: metrics.width(&label),
            height: metrics.box_height,
            label,
            term,
            x: 0,
            y: 0,
            subtree_width: 0,
            depth: 0,
            retracted,
            horizontal,
            vertical,
        };
        self.diagram.max_len = self.diagram.max_len.max(address.len());
        self.diagram.nodes.insert(address.clone(), node);
        address
    }

    pub fn expand_goal(&mut self, goal: &Term, address: NodeAddress, ancestors: &mut Vec<PredKey>) -> NodeAddress {
        let Some(key) = goal.indicator() else {
            return self.insert(address, NodeKind::UserGoal, goal.clone(), false, vec![], vec![]);
        };
        if is_builtin(goal) {
            return self.insert(address, NodeKind::BuiltinGoal, goal.clone(), false, vec![], vec![]);
        }
        if ancestors.contains(&key) {
            return self.insert(address, NodeKind::RecursiveGoal, goal.clone(), false, vec![], vec![]);
        }
        let mut vertical = Vec::new();
        for &id in self.program.predicate(&key) {
            let clause = self.program.clause(id).unwrap();
            if statically_unifiable(goal, &clause.head) {
                vertical.push(self.expand_clause(clause, address.alt(id), ancestors));
            }
        }
        self.insert(address, NodeKind::UserGoal, goal.clone(), false, vec![], vertical)
    }

    pub fn expand_clause(
        &mut self,
        clause: &Clause,
        address: NodeAddress,
        ancestors: &mut Vec<PredKey>,
    ) -> NodeAddress {
        ancestors.push(clause.key());
        let horizontal =
            clause.body.iter().enumerate().map(|(j, g)| self.expand_goal(g, address.body(j), ancestors)).collect();
        ancestors.pop();
        self.insert(address, NodeKind::ClauseHead, clause.head.clone(), clause.retracted, horizontal, vec![])
    }
}

/// Does `goal`, read on its own, unify with `head`? Both are renamed apart first,
/// so variables shared with the rest of their clauses play no part.
pub(super) fn statically_unifiable(goal: &Term, head: &Term) -> bool {
    let mut next = 0u64;
    let mut fresh = |term: &Term| {
        let mut map: BTreeMap<VarId, VarId> = BTreeMap::new();
        term.map_vars(&mut |name, id| {
            let new = *map.entry(id).or_insert_with(|| {
                next += 1;
                VarId(next)
            });
            Term::Var { name: name.to_string(), id: new }
        })
    };
    let goal = fresh(goal);
    let head = fresh(head);
    Substitution::new().unifiable(&goal, &head)
}
