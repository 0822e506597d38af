//! One program + query run, observed through a Logichart diagram.
//!
//! A [`Session`] owns the resolution machine and the diagram. Each machine
//! event is folded into per-node [`VisualState`]s and turned into protocol
//! messages; the raw events are logged so any prefix of the run can be
//! replayed to recover the node colors at that point.

mod host;
mod protocol;
mod state;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::address::{NodeAddress, Segment};
use crate::engine::{Binding, EngineError, EventKind, Machine, Status, TraceEvent};
use crate::logichart::{apply_patch, build_and_layout, DbChange, Diagram, DiagramConfig};
use crate::term::{parse_program, parse_query, Program, SyntaxError};

pub use host::Host;
pub use protocol::ProtocolMessage;
pub use state::VisualState;

/// Node colors by address; absent nodes are untouched.
pub type States = BTreeMap<NodeAddress, VisualState>;

/// Upper bound on machine steps taken by one [`Session::run`] call.
pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OneStep,
    Automatic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    Program(SyntaxError),
    Query(SyntaxError),
    Engine(EngineError),
    ReplayOutOfRange { upto: usize, len: usize },
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionError::Program(e) => write!(f, "program: {e}"),
            SessionError::Query(e) => write!(f, "query: {e}"),
            SessionError::Engine(e) => write!(f, "{e}"),
            SessionError::ReplayOutOfRange { upto, len } => write!(f, "replay index {upto} beyond log of {len} events"),
        }
    }
}

impl std::error::Error for SessionError {}

impl From<EngineError> for SessionError {
    fn from(e: EngineError) -> Self {
        SessionError::Engine(e)
    }
}

/// A variable value shown in the bindings panel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelEntry {
    pub address: NodeAddress,
    pub name: String,
    pub value: String,
}

/// Diagram and colors as seen after some prefix of the event log.
#[derive(Debug, Clone)]
struct Tracker {
    diagram: Diagram,
    /// Mirror of the machine's database at this point of the log.
    db: Program,
    states: States,
    solutions: usize,
    last_solution: Vec<Binding>,
}

impl Tracker {
    /// Folds one event in. `source` is any later state of the machine's
    /// database; clauses are only ever appended to it, so ids stay valid.
    fn apply(&mut self, event: &TraceEvent, source: &Program) -> Vec<ProtocolMessage> {
        let mut out = Vec::new();
        match event.kind {
            EventKind::Call | EventKind::Exit | EventKind::Fail | EventKind::Redo => {
                let address = event.address.clone().unwrap_or_default();
                let mapped = self.diagram.nearest(&address).address.clone();
                if mapped == address {
                    self.transition(&address, event.kind, &mut out);
                }
                let mut notes = Vec::new();
                let depth = address.segments_after(mapped.len()).filter(|s| matches!(s, Segment::Alt(_))).count();
                if depth > 0 {
                    notes.push(format!("recursion depth {depth}"));
                }
                notes.extend(event.text.clone());
                out.push(ProtocolMessage::Bindings {
                    address: mapped,
                    vars: event.bindings.clone(),
                    text: (!notes.is_empty()).then(|| notes.join("; ")),
                });
            }
            EventKind::CutPrune => {
                for address in &event.pruned {
                    if self.diagram.contains(address) {
                        self.transition(address, EventKind::CutPrune, &mut out);
                    }
                }
            }
            EventKind::DbAssertA | EventKind::DbAssertZ | EventKind::DbRetract => {
                let id = event.clause.as_ref().expect("database event names its clause").id;
                let change = if event.kind == EventKind::DbRetract {
                    self.db.retract(id);
                    DbChange::Retract(self.db.clause(id).unwrap().clone())
                } else {
                    let mut clause = source.clause(id).expect("asserted clause is in the database").clone();
                    clause.retracted = false;
                    let (head, body) = (clause.head.clone(), clause.body.clone());
                    let mirrored = if event.kind == EventKind::DbAssertA {
                        self.db.add_first(head, body)
                    } else {
                        self.db.add_last(head, body)
                    };
                    debug_assert_eq!(mirrored, id);
                    if event.kind == EventKind::DbAssertA {
                        DbChange::AssertA(clause)
                    } else {
                        DbChange::AssertZ(clause)
                    }
                };
                let (diagram, patch) = apply_patch(&self.diagram, &self.db, &change);
                self.diagram = diagram;
                out.push(ProtocolMessage::DiagramPatch { patch });
            }
            EventKind::Output => out.push(ProtocolMessage::OutputText { text: event.text.clone().unwrap_or_default() }),
            EventKind::SolutionFound => {
                self.solutions += 1;
                self.last_solution = event.bindings.clone();
                out.push(ProtocolMessage::Bindings {
                    address: NodeAddress::root(),
                    vars: event.bindings.clone(),
                    text: Some(format!("solution {}", self.solutions)),
                });
            }
            EventKind::PromptBacktrack => {
                out.push(ProtocolMessage::PromptBacktrack { vars: self.last_solution.clone() })
            }
            EventKind::QueryDone => {
                if let Some(message) = &event.text {
                    out.push(ProtocolMessage::error(message.clone()));
                }
                out.push(ProtocolMessage::Done { success: event.success.unwrap_or(false), solutions: self.solutions });
            }
        }
        out
    }

    fn transition(&mut self, address: &NodeAddress, port: EventKind, out: &mut Vec<ProtocolMessage>) {
        let current = self.states.get(address).copied().unwrap_or_default();
        if let Some(state) = current.after(port) {
            self.states.insert(address.clone(), state);
            out.push(ProtocolMessage::NodeState { address: address.clone(), state });
        }
    }
}

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    program_source: String,
    query_source: String,
    config: DiagramConfig,
    machine: Machine,
    initial: Tracker,
    tracker: Tracker,
    mode: Mode,
    log: Vec<TraceEvent>,
    panel: Vec<PanelEntry>,
    step_limit: usize,
    aborted: bool,
}

impl Session {
    /// Parses both sources, builds and lays out the diagram and prepares the
    /// machine. Returns the session with its initial `DiagramFull` message.
    pub fn create(
        program: &str,
        query: &str,
        config: DiagramConfig,
    ) -> Result<(Session, ProtocolMessage), SessionError> {
        let parsed = parse_program(program).map_err(SessionError::Program)?;
        let goals = parse_query(query).map_err(SessionError::Query)?;
        let machine = Machine::new(&parsed, goals.clone())?;
        let diagram = build_and_layout(&parsed, &goals, config);
        let full = ProtocolMessage::DiagramFull(diagram.to_json());
        let tracker = Tracker {
            diagram,
            db: machine.database().clone(),
            states: States::new(),
            solutions: 0,
            last_solution: Vec::new(),
        };
        let session = Session {
            id: format!("s{}", NEXT_SESSION.fetch_add(1, Ordering::Relaxed)),
            program_source: program.to_string(),
            query_source: query.to_string(),
            config,
            machine,
            initial: tracker.clone(),
            tracker,
            mode: Mode::OneStep,
            log: Vec::new(),
            panel: Vec::new(),
            step_limit: DEFAULT_STEP_LIMIT,
            aborted: false,
        };
        Ok((session, full))
    }

    /// A fresh session over the same sources and layout constants.
    pub fn reset(&self) -> (Session, ProtocolMessage) {
        Session::create(&self.program_source, &self.query_source, self.config).expect("sources parsed once already")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn diagram(&self) -> &Diagram {
        &self.tracker.diagram
    }

    pub fn states(&self) -> &States {
        &self.tracker.states
    }

    pub fn state(&self, address: &NodeAddress) -> VisualState {
        self.tracker.states.get(address).copied().unwrap_or_default()
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn log(&self) -> &[TraceEvent] {
        &self.log
    }

    pub fn bindings_panel(&self) -> &[PanelEntry] {
        &self.panel
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn set_step_limit(&mut self, limit: usize) {
        self.step_limit = limit;
    }

    /// The machine's status, except that a run stopped by the step limit counts as done.
    pub fn status(&self) -> Status {
        if self.aborted {
            Status::Done
        } else {
            self.machine.status()
        }
    }

    /// Advances the machine by one event and returns the messages it maps to.
    pub fn step(&mut self) -> Result<Vec<ProtocolMessage>, EngineError> {
        if self.aborted {
            return Err(EngineError::NotRunning(Status::Done));
        }
        let event = self.machine.step()?;
        Ok(self.record(event))
    }

    /// Steps until the run finishes or asks whether to look for more solutions.
    pub fn run(&mut self) -> Result<Vec<ProtocolMessage>, EngineError> {
        self.mode = Mode::Automatic;
        let mut out = self.step()?;
        let mut steps = 1;
        while self.machine.status() == Status::Running {
            if steps >= self.step_limit {
                self.aborted = true;
                out.push(ProtocolMessage::error(format!("stopped after {steps} steps")));
                out.push(ProtocolMessage::Done { success: false, solutions: self.tracker.solutions });
                break;
            }
            out.extend(self.step()?);
            steps += 1;
        }
        Ok(out)
    }

    /// Answers the backtracking prompt. Declining finishes the run; accepting
    /// only resumes the machine, and the caller decides how far to go.
    pub fn answer_backtrack(&mut self, more: bool) -> Result<Vec<ProtocolMessage>, EngineError> {
        match self.machine.answer_backtrack(more)? {
            Some(event) => Ok(self.record(event)),
            None => Ok(Vec::new()),
        }
    }

    fn record(&mut self, event: TraceEvent) -> Vec<ProtocolMessage> {
        let out = self.tracker.apply(&event, self.machine.database());
        self.log.push(event);
        for message in &out {
            if let ProtocolMessage::Bindings { address, vars, .. } = message {
                self.panel.extend(vars.iter().map(|b| PanelEntry {
                    address: address.clone(),
                    name: b.name.clone(),
                    value: b.value.clone(),
                }));
            }
        }
        out
    }

    /// Node colors after the first `upto` logged events, recomputed from scratch.
    pub fn replay(&self, upto: usize) -> Result<States, SessionError> {
        if upto > self.log.len() {
            return Err(SessionError::ReplayOutOfRange { upto, len: self.log.len() });
        }
        let mut tracker = self.initial.clone();
        for event in &self.log[..upto] {
            tracker.apply(event, self.machine.database());
        }
        Ok(tracker.states)
    }

    /// Messages for a client that needs the whole picture: the diagram, then
    /// every node that is not untouched.
    pub fn snapshot(&self) -> Vec<ProtocolMessage> {
        let mut out = vec![ProtocolMessage::DiagramFull(self.diagram().to_json())];
        out.extend(
            self.states()
                .iter()
                .map(|(address, &state)| ProtocolMessage::NodeState { address: address.clone(), state }),
        );
        out
    }
}

pub fn create_session(program: &str, query: &str) -> Result<(Session, ProtocolMessage), SessionError> {
    Session::create(program, query, DiagramConfig::default())
}

pub fn session_step(s: &mut Session) -> Result<Vec<ProtocolMessage>, EngineError> {
    s.step()
}

pub fn session_run(s: &mut Session) -> Result<Vec<ProtocolMessage>, EngineError> {
    s.run()
}

pub fn replay(s: &Session, upto: usize) -> Result<States, SessionError> {
    s.replay(upto)
}
