//! Random small Prolog programs for property tests.
//!
//! Programs have up to six predicates `p0..p5` with up to three clauses each.
//! Bodies mix calls to other predicates with built-ins, so diagrams exercise
//! alternatives, recursion cut-offs and built-in leaves. Nothing guarantees
//! termination; runs are bounded by a step budget.

#![allow(dead_code)]

use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct Generated {
    pub program: String,
    pub query: String,
}

fn arg() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        Just("X".to_string()),
        Just("Y".to_string()),
        Just("_".to_string()),
        Just("[]".to_string()),
        Just("[X|T]".to_string()),
        Just("f(X)".to_string()),
        (0i64..4).prop_map(|n| n.to_string()),
    ]
}

fn call(arities: Vec<usize>) -> impl Strategy<Value = String> {
    let n = arities.len();
    (0..n, prop::collection::vec(arg(), 2)).prop_map(move |(p, args)| atom_or_call(p, arities[p], &args))
}

fn atom_or_call(p: usize, arity: usize, args: &[String]) -> String {
    if arity == 0 {
        format!("p{p}")
    } else {
        format!("p{p}({})", args[..arity].join(", "))
    }
}

fn builtin() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("true".to_string()),
        Just("fail".to_string()),
        Just("!".to_string()),
        Just("write(X)".to_string()),
        Just("nl".to_string()),
        Just("X = a".to_string()),
        Just("X \\== Y".to_string()),
        Just("Y = f(X)".to_string()),
        Just("atom(X)".to_string()),
    ]
}

fn goal(arities: Vec<usize>) -> impl Strategy<Value = String> {
    prop_oneof![3 => call(arities), 2 => builtin()]
}

fn clause(p: usize, arities: Vec<usize>) -> impl Strategy<Value = String> {
    let arity = arities[p];
    (prop::collection::vec(arg(), 2), prop::collection::vec(goal(arities), 0..=3)).prop_map(move |(args, body)| {
        let head = atom_or_call(p, arity, &args);
        if body.is_empty() {
            format!("{head}.")
        } else {
            format!("{head} :- {}.", body.join(", "))
        }
    })
}

pub fn program() -> impl Strategy<Value = Generated> {
    prop::collection::vec(0usize..=2, 1..=6).prop_flat_map(|arities| {
        let n = arities.len();
        let clauses: Vec<_> =
            (0..n).map(|p| prop::collection::vec(clause(p, arities.clone()), 0..=3).boxed()).collect();
        let query = prop::collection::vec(call(arities.clone()), 1..=2);
        (clauses, query).prop_map(|(clauses, query)| Generated {
            program: clauses.into_iter().flatten().map(|c| c + "\n").collect(),
            query: format!("?- {}.", query.join(", ")),
        })
    })
}
