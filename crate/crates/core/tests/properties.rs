mod common;

use std::collections::HashMap;

use common::gen::{program, Generated};
use logichart_core::engine::{is_builtin, EventKind, Machine, Status, Substitution, TraceEvent, QUERY_HEAD};
use logichart_core::logichart::{build_and_layout, invariants, Diagram, DiagramConfig, NodeKind};
use logichart_core::session::{Session, VisualState};
use logichart_core::term::{format_term, parse_program, parse_query, parse_term, Program, Term};
use logichart_core::{NodeAddress, Segment};
use proptest::prelude::*;

const STEPS: usize = 800;

fn parsed(g: &Generated) -> (Program, Vec<Term>) {
    (parse_program(&g.program).unwrap(), parse_query(&g.query).unwrap())
}

// ---- an independent unifier over plain trees -------------------------------

#[derive(Clone, Debug, PartialEq)]
enum T {
    V(String),
    F(String, Vec<T>),
}

fn tree(t: &Term, side: &str) -> T {
    match t {
        Term::Var { id, .. } => T::V(format!("{side}{}", id.0)),
        Term::Atom(a) => T::F(a.clone(), vec![]),
        Term::Integer(n) => T::F(format!("#{n}"), vec![]),
        Term::Compound { functor, args } => T::F(functor.clone(), args.iter().map(|a| tree(a, side)).collect()),
    }
}

fn resolve<'a>(t: &'a T, env: &'a HashMap<String, T>) -> &'a T {
    match t {
        T::V(v) => env.get(v).map(|b| resolve(b, env)).unwrap_or(t),
        _ => t,
    }
}

fn occurs(v: &str, t: &T, env: &HashMap<String, T>) -> bool {
    match resolve(t, env) {
        T::V(w) => w == v,
        T::F(_, args) => args.iter().any(|a| occurs(v, a, env)),
    }
}

fn unify(a: &T, b: &T, env: &mut HashMap<String, T>) -> bool {
    let (a, b) = (resolve(a, env).clone(), resolve(b, env).clone());
    match (&a, &b) {
        (T::V(x), T::V(y)) if x == y => true,
        (T::V(x), t) | (t, T::V(x)) => {
            if occurs(x, t, env) {
                return false;
            }
            env.insert(x.clone(), t.clone());
            true
        }
        (T::F(f, xs), T::F(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, env))
        }
    }
}

/// Structure expected from the expansion rules, checked node by node.
fn check_expansion(d: &Diagram, p: &Program) -> Result<(), String> {
    let mut stack = vec![(NodeAddress::root(), vec![QUERY_HEAD.to_string() + "/0"])];
    let mut seen = 0;
    while let Some((addr, ancestors)) = stack.pop() {
        let node = d.node(&addr).ok_or(format!("missing node {addr}"))?;
        seen += 1;
        match node.kind {
            NodeKind::Root | NodeKind::ClauseHead => {
                let key = node.term.indicator().unwrap().to_string();
                let mut inner = ancestors.clone();
                if node.kind == NodeKind::ClauseHead {
                    inner.push(key);
                    let Some(Segment::Alt(id)) = addr.last() else {
                        return Err(format!("{addr} is not an alternative"));
                    };
                    let clause = p.clause(id).unwrap();
                    if node.term != clause.head || node.horizontal.len() != clause.body.len() {
                        return Err(format!("{addr} does not match clause {id}"));
                    }
                }
                for (i, child) in node.horizontal.iter().enumerate() {
                    if *child != addr.body(i) {
                        return Err(format!("{child} misnumbered"));
                    }
                    stack.push((child.clone(), inner.clone()));
                }
                if !node.vertical.is_empty() {
                    return Err(format!("{addr} has alternatives"));
                }
            }
            NodeKind::BuiltinGoal | NodeKind::RecursiveGoal | NodeKind::UserGoal => {
                if !node.horizontal.is_empty() {
                    return Err(format!("{addr} has a body"));
                }
                let key = node.term.indicator().map(|k| k.to_string());
                let builtin = is_builtin(&node.term);
                let recursive = !builtin && key.as_ref().is_some_and(|k| ancestors.contains(k));
                let expected_kind = if builtin {
                    NodeKind::BuiltinGoal
                } else if recursive {
                    NodeKind::RecursiveGoal
                } else {
                    NodeKind::UserGoal
                };
                if node.kind != expected_kind {
                    return Err(format!("{addr} is {:?}, expected {expected_kind:?}", node.kind));
                }
                let expected: Vec<NodeAddress> = match node.term.indicator() {
                    Some(k) if expected_kind == NodeKind::UserGoal => p
                        .predicate(&k)
                        .iter()
                        .filter(|&&id| {
                            let head = &p.clause(id).unwrap().head;
                            unify(&tree(&node.term, "g"), &tree(head, "h"), &mut HashMap::new())
                        })
                        .map(|&id| addr.alt(id))
                        .collect(),
                    _ => vec![],
                };
                if node.vertical != expected {
                    return Err(format!("{addr}: alternatives {:?}, expected {expected:?}", node.vertical));
                }
                for alt in &node.vertical {
                    stack.push((alt.clone(), ancestors.clone()));
                }
            }
        }
    }
    if seen != d.len() {
        return Err(format!("{} nodes unreachable", d.len() - seen));
    }
    Ok(())
}

// ---- event stream checks -----------------------------------------------------

fn events(g: &Generated) -> Vec<TraceEvent> {
    let (p, q) = parsed(g);
    let mut m = Machine::new(&p, q).unwrap();
    let mut out = Vec::new();
    while out.len() < STEPS {
        match m.status() {
            Status::Running => out.push(m.step().unwrap()),
            Status::AwaitingBacktrackAnswer => {
                out.extend(m.answer_backtrack(true).unwrap());
            }
            Status::Done => break,
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Port {
    Open,
    Exited,
    Failed,
}

/// Every box is entered by Call, left by Exit or Fail, and only re-entered by
/// Redo after an Exit (or a fresh Call after it was left).
fn check_ports(events: &[TraceEvent]) -> Result<(), String> {
    let mut boxes: HashMap<NodeAddress, Port> = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        if !e.kind.is_port() {
            continue;
        }
        let a = e.address.clone().ok_or(format!("event {i} has no address"))?;
        let state = boxes.get(&a).copied();
        let next = match (e.kind, state) {
            (EventKind::Call, None | Some(Port::Exited) | Some(Port::Failed)) => Port::Open,
            (EventKind::Exit, Some(Port::Open)) => Port::Exited,
            (EventKind::Fail, Some(Port::Open)) => Port::Failed,
            (EventKind::Redo, Some(Port::Exited)) => Port::Open,
            _ => return Err(format!("event {i}: {:?} at {a} in state {state:?}", e.kind)),
        };
        boxes.insert(a, next);
    }
    Ok(())
}

/// A cut prunes only alternatives of its own clause's goal and of goals to its left.
fn check_cuts(events: &[TraceEvent]) -> Result<(), String> {
    for e in events.iter().filter(|e| e.kind == EventKind::CutPrune) {
        let cut = e.address.clone().unwrap();
        let Some(Segment::Body(i)) = cut.last() else { return Err(format!("cut at {cut}")) };
        let head = cut.parent().unwrap();
        let goal = head.parent();
        for p in &e.pruned {
            if !matches!(p.last(), Some(Segment::Alt(_))) {
                return Err(format!("pruned {p} is not an alternative"));
            }
            let left_sibling = (0..i).any(|j| p.starts_with(&head.body(j)));
            let sibling_clause = goal.as_ref().is_some_and(|g| p.parent().as_ref() == Some(g) && *p != head);
            if !(left_sibling || sibling_clause) {
                return Err(format!("cut at {cut} pruned {p}"));
            }
        }
    }
    Ok(())
}

// ---- term generation ------------------------------------------------------------

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec![
            "a",
            "foo",
            "[]",
            "'hello world'",
            "\"q\"",
            "+",
            "-",
            "it's",
            "ÿ",
            "{}",
            "!",
            ";",
            ","
        ])
        .prop_map(|s| match parse_term(s) {
            Ok(t) => t,
            Err(_) => Term::atom(s),
        }),
        (-20i64..20).prop_map(Term::Integer),
        prop::sample::select(vec![(1, "X"), (2, "Y"), (3, "Long_Name")]).prop_map(|(id, n)| Term::var(n, id)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec!["f", "g", "+", "-", "*", "=", ":-", ",", "is", "mod", "<", "\\=", "-"]),
                prop::collection::vec(inner.clone(), 1..=3)
            )
                .prop_map(|(f, args)| Term::compound(f, args)),
            (prop::collection::vec(inner.clone(), 0..3), prop::option::of(inner))
                .prop_map(|(items, tail)| Term::list(items, tail)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn printed_terms_read_back(t in term()) {
        let text = format_term(&t, true);
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.alpha_eq(&t), "{} read back as {}", text, format_term(&back, true));
    }

    #[test]
    fn layouts_satisfy_invariants(g in program()) {
        let (p, q) = parsed(&g);
        let d = build_and_layout(&p, &q, DiagramConfig::default());
        prop_assert_eq!(invariants::check(&d), vec![]);
        check_expansion(&d, &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn events_respect_the_box_model(g in program()) {
        let events = events(&g);
        check_ports(&events).map_err(TestCaseError::fail)?;
        check_cuts(&events).map_err(TestCaseError::fail)?;
        let done: Vec<_> = events.iter().filter(|e| e.kind == EventKind::QueryDone).collect();
        prop_assert!(done.len() <= 1);
        if let Some(last) = done.first() {
            prop_assert!(std::ptr::eq(*last, events.last().unwrap()));
        }
    }

    #[test]
    fn replay_reproduces_live_states(g in program()) {
        let (mut s, _) = Session::create(&g.program, &g.query, DiagramConfig::default()).unwrap();
        let mut live = vec![s.states().clone()];
        while s.log().len() < 300 {
            match s.status() {
                Status::Running => { s.step().unwrap(); }
                Status::AwaitingBacktrackAnswer => { s.answer_backtrack(true).unwrap(); }
                Status::Done => break,
            }
            while live.len() <= s.log().len() {
                live.push(s.states().clone());
            }
        }
        for (i, states) in live.iter().enumerate().filter(|(i, _)| i % 7 == 0 || *i + 1 == live.len()) {
            prop_assert_eq!(&s.replay(i).unwrap(), states);
            prop_assert!(states.values().all(|v| *v != VisualState::Untouched));
        }
        prop_assert_eq!(s.replay(s.log().len()).unwrap(), s.replay(s.log().len()).unwrap());
    }

    #[test]
    fn undo_restores_bindings(pairs in prop::collection::vec((term(), term()), 1..6)) {
        let mut s = Substitution::new();
        for (a, b) in &pairs {
            let before = s.snapshot();
            let mark = s.mark();
            let unified = s.unify(a, b);
            if !unified {
                prop_assert_eq!(s.snapshot(), before.clone());
            }
            s.undo_to(mark);
            prop_assert_eq!(s.snapshot(), before);
            // keep some bindings so later pairs start from a non-empty substitution
            s.unify(a, b);
        }
    }
}
