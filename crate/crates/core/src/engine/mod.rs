//! Resolution machine: leftmost, depth-first SLD resolution with cut, a small
//! built-in set and a mutable clause database, driven one trace event at a time.
//!
//! Every goal invocation is a box with four ports (Call, Exit, Fail, Redo).
//! Clause heads are boxes too: selecting a clause calls its head, finishing
//! the body exits it, and backtracking out of the body fails it. Backtracking
//! re-enters exited boxes through Redo, innermost last, until a box with an
//! untried clause is found.

pub mod builtins;
mod event;
mod subst;

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::address::NodeAddress;
use crate::term::{format_clause, split_clause, ClauseId, PredKey, Program, Term, TermFormatter, VarId, VarStyle};

pub use builtins::{is_builtin, Builtin};
pub use event::{Binding, ClauseRef, EventKind, TraceEvent};
pub use subst::{rename_apart, unify, Substitution, TrailMark};

/// Head of the clause wrapping the user's query.
pub const QUERY_HEAD: &str = "prolog_program";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("instantiation error")]
    Instantiation,
    #[error("type error: expected {expected}, found {culprit}")]
    Type { expected: &'static str, culprit: String },
    #[error("evaluation error: {0}")]
    Evaluation(&'static str),
    #[error("the query has no goals")]
    EmptyQuery,
    #[error("machine is {0:?}, not running")]
    NotRunning(Status),
    #[error("machine is {0:?}, not waiting for a backtracking answer")]
    NotAwaitingAnswer(Status),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Running,
    AwaitingBacktrackAnswer,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbChangeKind {
    AssertA,
    AssertZ,
    Retract,
}

type FrameId = usize;
type Scope = Arc<[(String, VarId)]>;

#[derive(Debug, Clone)]
struct Activation {
    head: Term,
    head_addr: NodeAddress,
    body: Vec<Term>,
    vars: Scope,
    /// Trail position before head unification.
    mark: TrailMark,
    /// Frames of the body goals entered so far; index equals body position.
    children: Vec<FrameId>,
    /// Body position of an executed cut.
    cut_at: Option<usize>,
}

#[derive(Debug, Clone, Default)]
struct UserFrame {
    candidates: VecDeque<ClauseId>,
    active: Option<Activation>,
}

#[derive(Debug, Clone)]
enum FrameKind {
    Unresolved,
    Builtin(Builtin),
    User(UserFrame),
}

#[derive(Debug, Clone)]
struct Frame {
    goal: Term,
    address: NodeAddress,
    /// Enclosing invocation and body position; `None` for the query root.
    parent: Option<(FrameId, usize)>,
    /// Named variables of the enclosing clause instance.
    scope: Scope,
    mark: TrailMark,
    kind: FrameKind,
    message: Option<String>,
}

#[derive(Debug, Clone, Copy)]
enum Control {
    Call(FrameId),
    Execute(FrameId),
    TryClause(FrameId),
    Continue(FrameId, usize),
    Exit(FrameId),
    Fail(FrameId),
    Backtrack(FrameId, usize),
    ClauseFailed(FrameId),
    Redo(FrameId),
    Solution,
    Halt,
}

/// A resolution run over one program and query.
#[derive(Debug, Clone)]
pub struct Machine {
    db: Program,
    synthetic: ClauseId,
    subst: Substitution,
    frames: Vec<Frame>,
    next: Control,
    queue: VecDeque<TraceEvent>,
    status: Status,
    next_var: u64,
    output: String,
    solutions: usize,
    query_vars: Scope,
}

const ROOT: FrameId = 0;

fn named(vars: Vec<(String, VarId)>) -> Scope {
    vars.into_iter().filter(|(name, _)| name != "_").collect()
}

impl Machine {
    /// Wraps the query as `prolog_program :- G1, ..., Gn` and prepares the first step.
    pub fn new(program: &Program, query: Vec<Term>) -> Result<Machine, EngineError> {
        if query.is_empty() {
            return Err(EngineError::EmptyQuery);
        }
        let query_max = query.iter().flat_map(|g| g.variables()).map(|(_, id)| id.0).max().unwrap_or(0);
        let mut db = program.clone();
        let synthetic = db.add_last(Term::atom(QUERY_HEAD), query);
        let mut next_var = program.max_var_id().max(query_max) + 1;
        let clause = rename_apart(db.clause(synthetic).unwrap(), &mut next_var);
        let query_vars = named(clause.variables());
        let subst = Substitution::new();
        let mark = subst.mark();
        let root = Frame {
            goal: clause.head.clone(),
            address: NodeAddress::root(),
            parent: None,
            scope: query_vars.clone(),
            mark,
            kind: FrameKind::User(UserFrame {
                candidates: VecDeque::new(),
                active: Some(Activation {
                    head: clause.head,
                    head_addr: NodeAddress::root(),
                    body: clause.body,
                    vars: query_vars.clone(),
                    mark,
                    children: Vec::new(),
                    cut_at: None,
                }),
            }),
            message: None,
        };
        Ok(Machine {
            db,
            synthetic,
            subst,
            frames: vec![root],
            next: Control::Call(ROOT),
            queue: VecDeque::new(),
            status: Status::Running,
            next_var,
            output: String::new(),
            solutions: 0,
            query_vars,
        })
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// The working database, including the query clause and any tombstones.
    pub fn database(&self) -> &Program {
        &self.db
    }

    pub fn query_clause(&self) -> ClauseId {
        self.synthetic
    }

    /// Everything written by `write/1` and `nl/0` so far.
    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn solutions(&self) -> usize {
        self.solutions
    }

    pub fn substitution(&self) -> &Substitution {
        &self.subst
    }

    /// True when the query mentions at least one named variable.
    pub fn query_has_vars(&self) -> bool {
        !self.query_vars.is_empty()
    }

    /// Current values of the query's named variables.
    pub fn query_bindings(&self) -> Vec<Binding> {
        self.snapshot(&self.query_vars)
    }

    /// Advances resolution by exactly one trace event.
    pub fn step(&mut self) -> Result<TraceEvent, EngineError> {
        if self.status != Status::Running {
            return Err(EngineError::NotRunning(self.status));
        }
        while self.queue.is_empty() {
            let control = std::mem::replace(&mut self.next, Control::Halt);
            if let Control::Halt = control {
                unreachable!("machine halted without a final event");
            }
            self.next = self.transition(control);
        }
        let event = self.queue.pop_front().unwrap();
        match event.kind {
            EventKind::PromptBacktrack => self.status = Status::AwaitingBacktrackAnswer,
            EventKind::QueryDone => self.status = Status::Done,
            _ => {}
        }
        Ok(event)
    }

    /// Answers the "more solutions?" prompt. Declining finishes the run and
    /// returns its final event.
    pub fn answer_backtrack(&mut self, more: bool) -> Result<Option<TraceEvent>, EngineError> {
        if self.status != Status::AwaitingBacktrackAnswer {
            return Err(EngineError::NotAwaitingAnswer(self.status));
        }
        if more {
            self.status = Status::Running;
            self.next = Control::Redo(ROOT);
            Ok(None)
        } else {
            self.status = Status::Done;
            let mut done = TraceEvent::new(EventKind::QueryDone);
            done.success = Some(true);
            Ok(Some(done))
        }
    }

    fn transition(&mut self, control: Control) -> Control {
        let result = match control {
            Control::Call(f) => self.call(f),
            Control::Execute(f) => self.execute(f),
            Control::TryClause(f) => Ok(self.try_clause(f)),
            Control::Continue(f, i) => Ok(self.continue_body(f, i)),
            Control::Exit(f) => Ok(self.exit(f)),
            Control::Fail(f) => Ok(self.fail(f)),
            Control::Backtrack(f, i) => Ok(self.backtrack(f, i)),
            Control::ClauseFailed(f) => Ok(self.clause_failed(f)),
            Control::Redo(f) => Ok(self.redo(f)),
            Control::Solution => Ok(self.solution()),
            Control::Halt => Ok(Control::Halt),
        };
        result.unwrap_or_else(|(err, f)| {
            let goal = self.show(&self.frames[f].goal);
            let mut done = TraceEvent::new(EventKind::QueryDone);
            done.success = Some(false);
            done.text = Some(format!("{err} in {goal}"));
            self.queue.push_back(done);
            Control::Halt
        })
    }

    fn show(&self, t: &Term) -> String {
        TermFormatter { quoted: true, vars: VarStyle::Ids }.format(&self.subst.resolve(t))
    }

    fn snapshot(&self, scope: &Scope) -> Vec<Binding> {
        scope
            .iter()
            .map(|(name, id)| Binding {
                name: name.clone(),
                value: self.show(&Term::Var { name: name.clone(), id: *id }),
            })
            .collect()
    }

    /// The query itself has no box of its own; only its goals report ports.
    fn emit_goal(&mut self, kind: EventKind, f: FrameId) {
        if self.is_root(f) {
            return;
        }
        let frame = &self.frames[f];
        let mut event =
            TraceEvent::port(kind, frame.address.clone(), self.show(&frame.goal), self.snapshot(&frame.scope));
        if kind == EventKind::Fail {
            event.text = self.frames[f].message.take();
        }
        self.queue.push_back(event);
    }

    fn emit_head(&mut self, kind: EventKind, f: FrameId) {
        let act = self.active(f);
        let event = TraceEvent::port(kind, act.head_addr.clone(), self.show(&act.head), self.snapshot(&act.vars));
        self.queue.push_back(event);
    }

    fn user(&mut self, f: FrameId) -> &mut UserFrame {
        match &mut self.frames[f].kind {
            FrameKind::User(u) => u,
            other => panic!("frame {f} is not a user call: {other:?}"),
        }
    }

    fn active(&self, f: FrameId) -> &Activation {
        match &self.frames[f].kind {
            FrameKind::User(UserFrame { active: Some(act), .. }) => act,
            other => panic!("frame {f} has no active clause: {other:?}"),
        }
    }

    fn active_mut(&mut self, f: FrameId) -> &mut Activation {
        self.user(f).active.as_mut().expect("active clause")
    }

    fn is_root(&self, f: FrameId) -> bool {
        self.frames[f].parent.is_none()
    }

    fn call(&mut self, f: FrameId) -> Result<Control, (EngineError, FrameId)> {
        self.emit_goal(EventKind::Call, f);
        if self.is_root(f) {
            return Ok(Control::Continue(f, 0));
        }
        let goal = self.subst.resolve(&self.frames[f].goal);
        let key = match &goal {
            Term::Var { .. } => return Err((EngineError::Instantiation, f)),
            Term::Integer(_) => return Err((EngineError::Type { expected: "callable", culprit: self.show(&goal) }, f)),
            callable => callable.indicator().unwrap(),
        };
        if let Some(b) = Builtin::lookup(&key) {
            self.frames[f].kind = FrameKind::Builtin(b);
            return Ok(Control::Execute(f));
        }
        if !self.db.is_defined(&key) {
            self.frames[f].kind = FrameKind::User(UserFrame::default());
            self.frames[f].message = Some(format!("existence error: unknown procedure {key}"));
            return Ok(Control::Fail(f));
        }
        let candidates = self.matching_clauses(&key, &goal);
        self.frames[f].kind = FrameKind::User(UserFrame { candidates, active: None });
        Ok(Control::TryClause(f))
    }

    /// Live clauses whose head unifies with the goal, in database order. This is
    /// the snapshot the call iterates over (logical update view).
    fn matching_clauses(&mut self, key: &PredKey, goal: &Term) -> VecDeque<ClauseId> {
        let mut scratch = self.next_var;
        let ids = self.db.predicate(key).to_vec();
        ids.into_iter()
            .filter(|&id| {
                let clause = self.db.clause(id).unwrap();
                if clause.retracted {
                    return false;
                }
                let renamed = rename_apart(clause, &mut scratch);
                self.subst.unifiable(&renamed.head, goal)
            })
            .collect()
    }

    fn try_clause(&mut self, f: FrameId) -> Control {
        loop {
            let Some(id) = self.user(f).candidates.pop_front() else {
                return Control::Fail(f);
            };
            let clause = self.db.clause(id).unwrap();
            // retracted since the call started
            if clause.retracted {
                continue;
            }
            let renamed = rename_apart(clause, &mut self.next_var);
            let mark = self.subst.mark();
            let goal = self.frames[f].goal.clone();
            if !self.subst.unify(&renamed.head, &goal) {
                continue;
            }
            let head_addr = self.frames[f].address.alt(id);
            let vars = named(renamed.variables());
            self.user(f).active = Some(Activation {
                head: renamed.head,
                head_addr,
                body: renamed.body,
                vars,
                mark,
                children: Vec::new(),
                cut_at: None,
            });
            self.emit_head(EventKind::Call, f);
            return Control::Continue(f, 0);
        }
    }

    fn continue_body(&mut self, f: FrameId, i: usize) -> Control {
        let act = self.active(f);
        if i == act.body.len() {
            if !self.is_root(f) {
                self.emit_head(EventKind::Exit, f);
            }
            return Control::Exit(f);
        }
        let child = Frame {
            goal: act.body[i].clone(),
            address: act.head_addr.body(i),
            parent: Some((f, i)),
            scope: act.vars.clone(),
            mark: self.subst.mark(),
            kind: FrameKind::Unresolved,
            message: None,
        };
        let id = self.frames.len();
        self.frames.push(child);
        let act = self.active_mut(f);
        debug_assert_eq!(act.children.len(), i);
        act.children.push(id);
        Control::Call(id)
    }

    fn exit(&mut self, f: FrameId) -> Control {
        self.emit_goal(EventKind::Exit, f);
        match self.frames[f].parent {
            None => Control::Solution,
            Some((p, pos)) => Control::Continue(p, pos + 1),
        }
    }

    fn fail(&mut self, f: FrameId) -> Control {
        self.subst.undo_to(self.frames[f].mark);
        self.emit_goal(EventKind::Fail, f);
        match self.frames[f].parent {
            None => {
                let mut done = TraceEvent::new(EventKind::QueryDone);
                done.success = Some(self.solutions > 0);
                self.queue.push_back(done);
                Control::Halt
            }
            Some((p, pos)) => {
                self.active_mut(p).children.truncate(pos);
                Control::Backtrack(p, pos)
            }
        }
    }

    /// Body goal `i` of `f`'s active clause has failed.
    fn backtrack(&mut self, f: FrameId, i: usize) -> Control {
        let act = self.active(f);
        if i == 0 || act.cut_at.is_some_and(|k| i <= k) {
            Control::ClauseFailed(f)
        } else {
            Control::Redo(act.children[i - 1])
        }
    }

    fn clause_failed(&mut self, f: FrameId) -> Control {
        let mark = self.active(f).mark;
        self.subst.undo_to(mark);
        if !self.is_root(f) {
            self.emit_head(EventKind::Fail, f);
        }
        self.user(f).active = None;
        Control::TryClause(f)
    }

    fn redo(&mut self, f: FrameId) -> Control {
        self.emit_goal(EventKind::Redo, f);
        match &self.frames[f].kind {
            FrameKind::User(UserFrame { active: Some(act), .. }) => {
                let n = act.body.len();
                if !self.is_root(f) {
                    self.emit_head(EventKind::Redo, f);
                }
                Control::Backtrack(f, n)
            }
            _ => Control::Fail(f),
        }
    }

    fn solution(&mut self) -> Control {
        self.solutions += 1;
        let mut found = TraceEvent::new(EventKind::SolutionFound);
        found.address = Some(NodeAddress::root());
        found.bindings = self.query_bindings();
        self.queue.push_back(found);
        if self.query_has_vars() {
            self.queue.push_back(TraceEvent::new(EventKind::PromptBacktrack));
        } else {
            let mut done = TraceEvent::new(EventKind::QueryDone);
            done.success = Some(true);
            self.queue.push_back(done);
        }
        Control::Halt
    }

    fn execute(&mut self, f: FrameId) -> Result<Control, (EngineError, FrameId)> {
        let FrameKind::Builtin(b) = self.frames[f].kind else { unreachable!("execute on a non-builtin frame") };
        let goal = self.frames[f].goal.clone();
        let goal = self.subst.walk(&goal).clone();
        let args = goal.args();
        let ok = |b: bool| if b { Control::Exit(f) } else { Control::Fail(f) };
        let arith = |m: &Self, i: usize| builtins::eval(&args[i], &m.subst).map_err(|e| (e, f));
        Ok(match b {
            Builtin::True => Control::Exit(f),
            Builtin::Fail => Control::Fail(f),
            Builtin::Cut => {
                let pruned = self.cut(f);
                let mut event = TraceEvent::new(EventKind::CutPrune);
                event.address = Some(self.frames[f].address.clone());
                event.pruned = pruned;
                self.queue.push_back(event);
                Control::Exit(f)
            }
            Builtin::Write => {
                let text = TermFormatter { quoted: false, vars: VarStyle::Ids }.format(&self.subst.resolve(&args[0]));
                self.write(text);
                Control::Exit(f)
            }
            Builtin::Nl => {
                self.write("\n".to_string());
                Control::Exit(f)
            }
            Builtin::Unify => ok(self.subst.unify(&args[0], &args[1])),
            Builtin::NotUnify => ok(!self.subst.unifiable(&args[0], &args[1])),
            Builtin::Identical => ok(self.subst.resolve(&args[0]) == self.subst.resolve(&args[1])),
            Builtin::NotIdentical => ok(self.subst.resolve(&args[0]) != self.subst.resolve(&args[1])),
            Builtin::Is => {
                let value = arith(self, 1)?;
                ok(self.subst.unify(&args[0], &Term::Integer(value)))
            }
            Builtin::ArithEq => ok(arith(self, 0)? == arith(self, 1)?),
            Builtin::ArithNe => ok(arith(self, 0)? != arith(self, 1)?),
            Builtin::Less => ok(arith(self, 0)? < arith(self, 1)?),
            Builtin::Greater => ok(arith(self, 0)? > arith(self, 1)?),
            Builtin::LessEq => ok(arith(self, 0)? <= arith(self, 1)?),
            Builtin::GreaterEq => ok(arith(self, 0)? >= arith(self, 1)?),
            Builtin::AssertA | Builtin::AssertZ | Builtin::Retract => {
                let kind = match b {
                    Builtin::AssertA => DbChangeKind::AssertA,
                    Builtin::AssertZ => DbChangeKind::AssertZ,
                    _ => DbChangeKind::Retract,
                };
                match self.db_change(kind, &args[0]).map_err(|e| (e, f))? {
                    Some(id) => {
                        let event_kind = match kind {
                            DbChangeKind::AssertA => EventKind::DbAssertA,
                            DbChangeKind::AssertZ => EventKind::DbAssertZ,
                            DbChangeKind::Retract => EventKind::DbRetract,
                        };
                        let mut event = TraceEvent::new(event_kind);
                        event.clause = Some(ClauseRef { id, text: format_clause(self.db.clause(id).unwrap()) });
                        self.queue.push_back(event);
                        Control::Exit(f)
                    }
                    None => Control::Fail(f),
                }
            }
            Builtin::Var => ok(self.subst.walk(&args[0]).is_var()),
            Builtin::Nonvar => ok(!self.subst.walk(&args[0]).is_var()),
            Builtin::Atom => ok(matches!(self.subst.walk(&args[0]), Term::Atom(_))),
        })
    }

    fn write(&mut self, text: String) {
        self.output.push_str(&text);
        let mut event = TraceEvent::new(EventKind::Output);
        event.text = Some(text);
        self.queue.push_back(event);
    }

    /// Applies a database change. Returns the affected clause, or `None` when
    /// `retract` finds no match.
    fn db_change(&mut self, kind: DbChangeKind, arg: &Term) -> Result<Option<ClauseId>, EngineError> {
        let term = self.subst.resolve(arg);
        match kind {
            DbChangeKind::AssertA | DbChangeKind::AssertZ => {
                if term.is_var() {
                    return Err(EngineError::Instantiation);
                }
                let (head, body) = split_clause(term)
                    .map_err(|e| EngineError::Type { expected: "callable", culprit: e.to_string() })?;
                Ok(Some(match kind {
                    DbChangeKind::AssertA => self.db.add_first(head, body),
                    _ => self.db.add_last(head, body),
                }))
            }
            DbChangeKind::Retract => {
                let (head, body) = match term {
                    Term::Compound { functor, mut args } if functor == ":-" && args.len() == 2 => {
                        let body = args.pop().unwrap();
                        (args.pop().unwrap(), body)
                    }
                    other => (other, Term::atom("true")),
                };
                let Some(key) = head.indicator() else {
                    return Err(match head {
                        Term::Var { .. } => EngineError::Instantiation,
                        other => EngineError::Type { expected: "callable", culprit: self.show(&other) },
                    });
                };
                for id in self.db.predicate(&key).to_vec() {
                    let clause = self.db.clause(id).unwrap();
                    if clause.retracted {
                        continue;
                    }
                    let renamed = rename_apart(clause, &mut self.next_var);
                    let mark = self.subst.mark();
                    if self.subst.unify(&head, &renamed.head)
                        && self.subst.unify(&body, &Term::conjunction(&renamed.body))
                    {
                        self.db.retract(id);
                        return Ok(Some(id));
                    }
                    self.subst.undo_to(mark);
                }
                Ok(None)
            }
        }
    }

    /// Discards the choices made since the cut's clause was entered and returns
    /// the addresses of the alternatives that will never be tried.
    fn cut(&mut self, f: FrameId) -> Vec<NodeAddress> {
        let (p, k) = self.frames[f].parent.expect("cut has an enclosing clause");
        let mut pruned = Vec::new();
        let left: Vec<FrameId> = self.active(p).children[..k].to_vec();
        for child in left {
            self.prune(child, &mut pruned);
        }
        let remaining = std::mem::take(&mut self.user(p).candidates);
        let address = self.frames[p].address.clone();
        pruned.extend(
            remaining.into_iter().filter(|id| !self.db.clause(*id).unwrap().retracted).map(|id| address.alt(id)),
        );
        self.active_mut(p).cut_at = Some(k);
        pruned
    }

    fn prune(&mut self, f: FrameId, pruned: &mut Vec<NodeAddress>) {
        let address = self.frames[f].address.clone();
        let FrameKind::User(user) = &mut self.frames[f].kind else { return };
        let remaining = std::mem::take(&mut user.candidates);
        let children = user.active.as_ref().map(|a| a.children.clone()).unwrap_or_default();
        pruned.extend(
            remaining.into_iter().filter(|id| !self.db.clause(*id).unwrap().retracted).map(|id| address.alt(id)),
        );
        for child in children {
            self.prune(child, pruned);
        }
    }
}

/// Steps until the machine stops, answering every prompt with `more`.
/// Returns the full event sequence.
pub fn run_to_end(machine: &mut Machine, more: bool) -> Vec<TraceEvent> {
    let mut events = Vec::new();
    loop {
        match machine.status() {
            Status::Running => events.push(machine.step().expect("running machine steps")),
            Status::AwaitingBacktrackAnswer => {
                if let Some(done) = machine.answer_backtrack(more).expect("awaiting answer") {
                    events.push(done);
                }
            }
            Status::Done => return events,
        }
    }
}
