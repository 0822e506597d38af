use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use logichart_core::engine::Status;
use logichart_core::logichart::{render_svg, DiagramConfig};
use logichart_core::session::{ProtocolMessage, Session, SessionError, DEFAULT_STEP_LIMIT};

use crate::args::{Format, Mode, RunArgs};

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Everything a batch run produced.
pub struct Trace {
    pub session: Session,
    pub messages: Vec<ProtocolMessage>,
    pub success: bool,
}

/// Runs `query` against `program` to the end. `on_step` sees the session
/// before the first step and after every later one.
pub fn trace(
    program: &str,
    query: &str,
    config: DiagramConfig,
    all_solutions: bool,
    mut on_step: impl FnMut(&Session) -> anyhow::Result<()>,
) -> anyhow::Result<Result<Trace, SessionError>> {
    let (mut session, full) = match Session::create(program, query, config) {
        Ok(created) => created,
        Err(e) => return Ok(Err(e)),
    };
    let mut messages = vec![full];
    on_step(&session)?;
    let mut steps = 0;
    loop {
        match session.status() {
            Status::Done => break,
            Status::AwaitingBacktrackAnswer => messages.extend(session.answer_backtrack(all_solutions)?),
            Status::Running if steps == DEFAULT_STEP_LIMIT => {
                messages.push(ProtocolMessage::error(format!("stopped after {steps} steps")));
                messages.push(ProtocolMessage::Done { success: false, solutions: session.machine().solutions() });
                break;
            }
            Status::Running => {
                messages.extend(session.step()?);
                steps += 1;
                on_step(&session)?;
            }
        }
    }
    let success = matches!(messages.last(), Some(ProtocolMessage::Done { success: true, .. }));
    Ok(Ok(Trace { session, messages, success }))
}

/// The `run` subcommand. Returns the process exit code.
pub fn run(args: &RunArgs) -> anyhow::Result<u8> {
    let program = match fs::read_to_string(&args.program) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("logichart: cannot read {}: {e}", args.program.display());
            return Ok(EXIT_USAGE);
        }
    };
    let format = match (args.format, args.mode) {
        (Format::Svg, Mode::Step) => Format::SvgFrames,
        (f, _) => f,
    };
    let frames_dir = match (format, &args.out) {
        (Format::SvgFrames, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir.clone())
        }
        (Format::SvgFrames, None) => {
            eprintln!("logichart: svg frames need an output directory (--out)");
            return Ok(EXIT_USAGE);
        }
        _ => None,
    };
    let mut frame = 0usize;
    let write_frame = |s: &Session| -> anyhow::Result<()> {
        if let Some(dir) = &frames_dir {
            let path = dir.join(format!("frame-{frame:05}.svg"));
            fs::write(&path, render_svg(s.diagram(), s.states()))
                .with_context(|| format!("writing {}", path.display()))?;
            frame += 1;
        }
        Ok(())
    };
    let trace = match trace(&program, &args.query, args.layout.config(), args.all_solutions, write_frame)? {
        Ok(trace) => trace,
        Err(e) => {
            eprintln!("logichart: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&trace.messages)?;
            text.push('\n');
            emit(args.out.as_deref(), text.as_bytes())?;
        }
        Format::Svg => {
            emit(args.out.as_deref(), render_svg(trace.session.diagram(), trace.session.states()).as_bytes())?
        }
        Format::SvgFrames => {}
    }
    Ok(if trace.success { EXIT_SUCCESS } else { EXIT_FAILURE })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", PathBuf::from(path).display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
