use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logichart_core::logichart::DiagramConfig;

#[derive(Debug, Parser)]
#[command(name = "logichart", version, about = "Trace Prolog queries on Logichart diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a query to completion and write its trace or diagram.
    Run(RunArgs),
    /// Serve the session protocol to the browser UI or over stdio.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// The protocol messages of the whole run, as a JSON array.
    Json,
    /// The diagram in its final state.
    Svg,
    /// One SVG per step, `frame-00000.svg` onwards, in the `--out` directory.
    SvgFrames,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Run to the end; `svg` shows the final state.
    Auto,
    /// Observe every step; `svg` output becomes one frame per step.
    Step,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Prolog source file.
    #[arg(long, short)]
    pub program: PathBuf,
    /// Query, with or without the leading `?-`.
    #[arg(long, short)]
    pub query: String,
    #[arg(long, short, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Output file (directory for svg-frames); standard output if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Ask for more solutions until there are none, instead of stopping at the first.
    #[arg(long)]
    pub all_solutions: bool,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "LOGICHART_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Speak length-prefixed JSON on standard input/output instead of listening.
    #[arg(long)]
    pub stdio: bool,
    /// Directory of UI files to serve at `/` instead of the built-in page.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

/// Overrides for the layout constants, in pixels.
#[derive(Debug, Args, Default)]
pub struct LayoutArgs {
    /// Horizontal gap between a subdiagram and the next body goal [default: 20]
    #[arg(long)]
    pub gap_x: Option<i64>,
    /// Vertical gap between a subdiagram and the next alternative [default: 12]
    #[arg(long)]
    pub gap_y: Option<i64>,
    /// Left margin of the root box [default: 10]
    #[arg(long)]
    pub root_x: Option<i64>,
    /// Top margin of the root box [default: 10]
    #[arg(long)]
    pub root_y: Option<i64>,
    /// Width of one label character [default: 8]
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    pub char_width: Option<i64>,
    /// Height of every node box [default: 24]
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    pub box_height: Option<i64>,
    /// Space between a label and its box edge, on each side [default: 8]
    #[arg(long, value_parser = clap::value_parser!(i64).range(0..))]
    pub padding: Option<i64>,
}

impl LayoutArgs {
    pub fn config(&self) -> DiagramConfig {
        let mut c = DiagramConfig::default();
        let s = &mut c.spacing;
        s.gap_x = self.gap_x.unwrap_or(s.gap_x);
        s.gap_y = self.gap_y.unwrap_or(s.gap_y);
        s.root_x = self.root_x.unwrap_or(s.root_x);
        s.root_y = self.root_y.unwrap_or(s.root_y);
        let m = &mut c.metrics;
        m.char_width = self.char_width.unwrap_or(m.char_width);
        m.box_height = self.box_height.unwrap_or(m.box_height);
        m.padding = self.padding.unwrap_or(m.padding);
        c
    }
}
