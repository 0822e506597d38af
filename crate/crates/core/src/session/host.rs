use crate::engine::Status;
use crate::logichart::DiagramConfig;

use super::{Mode, ProtocolMessage, Session, DEFAULT_STEP_LIMIT};

/// Serves the request side of the protocol for one client.
///
/// A session exists once both a program and a query have been accepted;
/// changing either rebuilds it. Every request gets at least one message back.
#[derive(Debug)]
pub struct Host {
    config: DiagramConfig,
    step_limit: usize,
    program: Option<String>,
    query: Option<String>,
    session: Option<Session>,
}

impl Host {
    pub fn new(config: DiagramConfig) -> Self {
        Host { config, step_limit: DEFAULT_STEP_LIMIT, program: None, query: None, session: None }
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn handle(&mut self, request: ProtocolMessage) -> Vec<ProtocolMessage> {
        use ProtocolMessage as M;
        match request {
            M::LoadProgram { text } => {
                if let Err(e) = crate::term::parse_program(&text) {
                    return vec![M::error(format!("program: {e}"))];
                }
                self.program = Some(text);
                self.rebuild()
            }
            M::SetQuery { text } => {
                if let Err(e) = crate::term::parse_query(&text) {
                    return vec![M::error(format!("query: {e}"))];
                }
                self.query = Some(text);
                self.rebuild()
            }
            M::Reset => self.rebuild(),
            M::GetDiagram => match &self.session {
                Some(s) => s.snapshot(),
                None => vec![no_session()],
            },
            M::Step => self.with_session(|s| {
                s.set_mode(Mode::OneStep);
                s.step()
            }),
            M::Run => self.with_session(Session::run),
            M::AnswerBacktrack { success } => self.with_session(|s| {
                let mut out = s.answer_backtrack(success)?;
                if success {
                    out.extend(match s.mode() {
                        Mode::OneStep => s.step()?,
                        Mode::Automatic => s.run()?,
                    });
                }
                Ok(out)
            }),
            other => vec![M::error(format!("{} is not a request", kind_name(&other)))],
        }
    }

    fn rebuild(&mut self) -> Vec<ProtocolMessage> {
        let (Some(program), Some(query)) = (&self.program, &self.query) else {
            self.session = None;
            return vec![ProtocolMessage::Ack];
        };
        match Session::create(program, query, self.config) {
            Ok((mut session, full)) => {
                session.set_step_limit(self.step_limit);
                self.session = Some(session);
                vec![full]
            }
            Err(e) => {
                self.session = None;
                vec![ProtocolMessage::error(e.to_string())]
            }
        }
    }

    fn with_session(
        &mut self,
        f: impl FnOnce(&mut Session) -> Result<Vec<ProtocolMessage>, crate::engine::EngineError>,
    ) -> Vec<ProtocolMessage> {
        let Some(session) = self.session.as_mut() else {
            return vec![no_session()];
        };
        match f(session) {
            Ok(out) if out.is_empty() => vec![ProtocolMessage::Ack],
            Ok(out) => out,
            Err(e) => vec![ProtocolMessage::error(match session.status() {
                Status::Done => "the query has finished; send Reset to run it again".to_string(),
                _ => e.to_string(),
            })],
        }
    }
}

fn no_session() -> ProtocolMessage {
    ProtocolMessage::error("no session: send LoadProgram and SetQuery first")
}

fn kind_name(m: &ProtocolMessage) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_else(|| "message".to_string())
}
