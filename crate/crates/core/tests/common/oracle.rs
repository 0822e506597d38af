//! Replays the reference corpus on the machine and compares with answers
//! frozen from Scryer Prolog (regenerate with `tools/freeze_oracle.py`).

use std::collections::HashMap;

use logichart_core::engine::{EventKind, Machine, Status};
use logichart_core::term::{parse_program, parse_query};
use regex::Regex;
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    program: String,
    query: String,
    max_solutions: usize,
}

#[derive(Deserialize)]
struct Frozen {
    cases: Vec<Expected>,
}

#[derive(Debug, Deserialize, PartialEq)]
struct Expected {
    name: String,
    output: Vec<String>,
    solutions: Vec<Vec<(String, String)>>,
    outcome: String,
}

/// Renames fresh variables to `_1`, `_2`, ... in order of appearance and
/// spells a prefix minus applied to a parenthesised operand without the space.
struct Normalizer {
    var: Regex,
    names: HashMap<String, usize>,
}

impl Normalizer {
    fn new() -> Self {
        Normalizer { var: Regex::new(r"_G?[0-9]+").unwrap(), names: HashMap::new() }
    }

    fn apply(&mut self, text: &str) -> String {
        let text = text.replace("- (", "-(");
        let mut out = String::new();
        let mut last = 0;
        for m in self.var.find_iter(&text) {
            let n = self.names.len() + 1;
            let id = *self.names.entry(m.as_str().to_string()).or_insert(n);
            out.push_str(&text[last..m.start()]);
            out.push_str(&format!("_{id}"));
            last = m.end();
        }
        out.push_str(&text[last..]);
        out
    }

    fn record(&mut self, e: Expected) -> Expected {
        // Normalize in the order the text was produced: output, then the bindings it precedes.
        let mut output = Vec::new();
        let mut solutions = Vec::new();
        for (i, chunk) in e.output.iter().enumerate() {
            output.push(self.apply(chunk));
            if let Some(sol) = e.solutions.get(i) {
                solutions.push(sol.iter().map(|(n, v)| (n.clone(), self.apply(v))).collect());
            }
        }
        Expected { output, solutions, ..e }
    }
}

fn run_machine(case: &Case, first_only: bool) -> Expected {
    let program = parse_program(&case.program).unwrap_or_else(|e| panic!("{}: {e}", case.name));
    let query = parse_query(&case.query).unwrap();
    let mut m = Machine::new(&program, query).unwrap();
    let mut output = vec![String::new()];
    let mut solutions = Vec::new();
    let mut outcome = None;
    for _ in 0..1_000_000 {
        match m.status() {
            Status::Done => break,
            Status::AwaitingBacktrackAnswer => {
                if let Some(done) = m.answer_backtrack(!first_only).unwrap() {
                    outcome = Some(if done.success == Some(true) { "success" } else { "failure" });
                }
                continue;
            }
            Status::Running => {}
        }
        let e = m.step().unwrap();
        match e.kind {
            EventKind::Output => output.last_mut().unwrap().push_str(e.text.as_deref().unwrap()),
            EventKind::SolutionFound => {
                solutions.push(e.bindings.iter().map(|b| (b.name.clone(), b.value.clone())).collect());
                output.push(String::new());
            }
            EventKind::QueryDone => {
                outcome = Some(match (e.text.is_some(), e.success) {
                    (true, _) => "error",
                    (false, Some(true)) => "success",
                    _ => "failure",
                });
            }
            _ => {}
        }
    }
    Expected { name: case.name.clone(), output, solutions, outcome: outcome.expect("run finished").to_string() }
}

/// What the reference answers look like when the run stops at the first solution.
fn truncate_to_first(mut e: Expected) -> Expected {
    if !e.solutions.is_empty() {
        e.solutions.truncate(1);
        e.output.truncate(1);
        e.output.push(String::new());
    }
    e
}

/// Number of programs in the corpus.
pub fn corpus_size() -> usize {
    serde_json::from_str::<Vec<Case>>(include_str!("../oracle/cases.json")).unwrap().len()
}

/// One line per program whose run differs from the reference.
pub fn mismatches() -> Vec<String> {
    let cases: Vec<Case> = serde_json::from_str(include_str!("../oracle/cases.json")).unwrap();
    let frozen: Frozen = serde_json::from_str(include_str!("../oracle/expected.json")).unwrap();
    assert_eq!(cases.len(), frozen.cases.len());
    let mut failures = Vec::new();
    for (case, expected) in cases.iter().zip(frozen.cases) {
        assert_eq!(case.name, expected.name);
        let has_vars = parse_query(&case.query).unwrap().iter().any(|g| !g.variables().is_empty());
        // A query without variables stops at its first solution; so does a capped one.
        let first_only = case.max_solutions == 1 || !has_vars;
        let expected = if first_only { truncate_to_first(expected) } else { expected };
        let actual = run_machine(case, first_only);
        let expected = Normalizer::new().record(expected);
        let actual = Normalizer::new().record(actual);
        if expected != actual {
            failures.push(format!("{}:\n  expected {expected:?}\n  actual   {actual:?}", case.name));
        }
    }
    failures
}
