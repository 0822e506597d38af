//! Prolog terms, clauses and programs, plus the reader and printer.

mod printer;
mod reader;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use printer::{format_clause, format_term, TermFormatter, VarStyle};
pub use reader::{parse_program, parse_query, parse_term, SyntaxError};

/// Identity of a variable within one machine run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u64);

/// Identity of a clause. Ids are handed out in source, then assertion, order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClauseId(pub u64);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Atom(String),
    Integer(i64),
    Var { name: String, id: VarId },
    Compound { functor: String, args: Vec<Term> },
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

impl Term {
    pub fn atom(name: impl Into<String>) -> Term {
        Term::Atom(name.into())
    }

    pub fn var(name: impl Into<String>, id: u64) -> Term {
        Term::Var { name: name.into(), id: VarId(id) }
    }

    /// Builds a compound term; an empty argument list yields an atom.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound { functor, args }
        }
    }

    pub fn nil() -> Term {
        Term::Atom(NIL.to_string())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(CONS, vec![head, tail])
    }

    /// Builds a proper list, or a partial list ending in `tail`.
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items.into_iter().rev().fold(tail.unwrap_or_else(Term::nil), |acc, item| Term::cons(item, acc))
    }

    /// Functor name and arity for callable terms.
    pub fn indicator(&self) -> Option<PredKey> {
        match self {
            Term::Atom(name) => Some(PredKey::new(name.clone(), 0)),
            Term::Compound { functor, args } => Some(PredKey::new(functor.clone(), args.len())),
            _ => None,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound { .. })
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var { .. })
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound { args, .. } => args,
            _ => &[],
        }
    }

    /// Splits a right-nested conjunction `(a,(b,c))` into `[a,b,c]`.
    pub fn conjuncts(self) -> Vec<Term> {
        let mut goals = Vec::new();
        let mut rest = self;
        loop {
            match rest {
                Term::Compound { functor, mut args } if functor == "," && args.len() == 2 => {
                    let right = args.pop().unwrap();
                    let left = args.pop().unwrap();
                    goals.extend(left.conjuncts());
                    rest = right;
                }
                other => {
                    goals.push(other);
                    return goals;
                }
            }
        }
    }

    /// Inverse of [`Term::conjuncts`]; the empty conjunction is `true`.
    pub fn conjunction(goals: &[Term]) -> Term {
        match goals.split_last() {
            None => Term::atom("true"),
            Some((last, init)) => {
                init.iter().rev().fold(last.clone(), |acc, goal| Term::compound(",", vec![goal.clone(), acc]))
            }
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn variables(&self) -> Vec<(String, VarId)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<(String, VarId)>) {
        match self {
            Term::Var { name, id } => {
                if !out.iter().any(|(_, seen)| seen == id) {
                    out.push((name.clone(), *id));
                }
            }
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Applies `f` to every variable, rebuilding the term.
    pub fn map_vars(&self, f: &mut impl FnMut(&str, VarId) -> Term) -> Term {
        match self {
            Term::Var { name, id } => f(name, *id),
            Term::Compound { functor, args } => {
                Term::Compound { functor: functor.clone(), args: args.iter().map(|a| a.map_vars(f)).collect() }
            }
            other => other.clone(),
        }
    }

    /// Structural equality up to a consistent bijective renaming of variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, fwd: &mut BTreeMap<VarId, VarId>, back: &mut BTreeMap<VarId, VarId>) -> bool {
            match (a, b) {
                (Term::Var { id: x, .. }, Term::Var { id: y, .. }) => match (fwd.get(x), back.get(y)) {
                    (None, None) => {
                        fwd.insert(*x, *y);
                        back.insert(*y, *x);
                        true
                    }
                    (Some(m), Some(n)) => m == y && n == x,
                    _ => false,
                },
                (Term::Compound { functor: f, args: xs }, Term::Compound { functor: g, args: ys }) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, back))
                }
                (x, y) => x == y,
            }
        }
        go(self, other, &mut BTreeMap::new(), &mut BTreeMap::new())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_term(self, true))
    }
}

/// Predicate indicator `name/arity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredKey { name: name.into(), arity }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub id: ClauseId,
    pub head: Term,
    pub body: Vec<Term>,
    /// Set by `retract/1`. Retracted clauses stay in the program as tombstones.
    pub retracted: bool,
}

impl Clause {
    pub fn key(&self) -> PredKey {
        self.head.indicator().expect("clause head is callable")
    }

    /// The clause as a single term, `Head :- Body` or just `Head` for facts.
    pub fn to_term(&self) -> Term {
        if self.body.is_empty() {
            self.head.clone()
        } else {
            Term::compound(":-", vec![self.head.clone(), Term::conjunction(&self.body)])
        }
    }

    pub fn variables(&self) -> Vec<(String, VarId)> {
        self.to_term().variables()
    }
}

/// Why a term cannot be turned into a clause.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClauseError {
    #[error("clause head must be an atom or compound term, found {0}")]
    BadHead(String),
}

/// Splits `H :- B` into head and body goals. Anything else is a fact.
pub fn split_clause(term: Term) -> Result<(Term, Vec<Term>), ClauseError> {
    let (head, body) = match term {
        Term::Compound { functor, mut args } if functor == ":-" && args.len() == 2 => {
            let body = args.pop().unwrap();
            let head = args.pop().unwrap();
            (head, body.conjuncts())
        }
        other => (other, Vec::new()),
    };
    if !head.is_callable() {
        return Err(ClauseError::BadHead(format_term(&head, true)));
    }
    Ok((head, body))
}

/// An ordered clause database with a per-predicate index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    index: BTreeMap<PredKey, Vec<ClauseId>>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.get(id.0 as usize)
    }

    pub fn next_id(&self) -> ClauseId {
        ClauseId(self.clauses.len() as u64)
    }

    /// Clause ids of a predicate in database order, tombstones included.
    pub fn predicate(&self, key: &PredKey) -> &[ClauseId] {
        self.index.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        self.index.contains_key(key)
    }

    /// Appends a clause at the end of its predicate and returns its id.
    pub fn add_last(&mut self, head: Term, body: Vec<Term>) -> ClauseId {
        self.insert(head, body, false)
    }

    /// Adds a clause in front of the existing clauses of its predicate.
    pub fn add_first(&mut self, head: Term, body: Vec<Term>) -> ClauseId {
        self.insert(head, body, true)
    }

    fn insert(&mut self, head: Term, body: Vec<Term>, front: bool) -> ClauseId {
        let id = self.next_id();
        let clause = Clause { id, head, body, retracted: false };
        let ids = self.index.entry(clause.key()).or_default();
        if front {
            ids.insert(0, id);
        } else {
            ids.push(id);
        }
        self.clauses.push(clause);
        id
    }

    /// Marks a clause retracted. Returns false if it already was.
    pub fn retract(&mut self, id: ClauseId) -> bool {
        match self.clauses.get_mut(id.0 as usize) {
            Some(clause) if !clause.retracted => {
                clause.retracted = true;
                true
            }
            _ => false,
        }
    }

    /// Highest variable id used by any stored clause, so fresh ids can be allocated above it.
    pub fn max_var_id(&self) -> u64 {
        self.clauses.iter().flat_map(|c| c.variables()).map(|(_, id)| id.0).max().unwrap_or(0)
    }

    #[cfg(test)]
    pub(crate) fn index_consistent(&self) -> bool {
        let mut seen: Vec<ClauseId> = self.index.values().flatten().copied().collect();
        seen.sort();
        seen == self.clauses.iter().map(|c| c.id).collect::<Vec<_>>()
            && self.index.iter().all(|(k, ids)| ids.iter().all(|id| &self.clauses[id.0 as usize].key() == k))
    }
}
