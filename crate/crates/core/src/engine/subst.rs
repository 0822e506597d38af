use std::collections::{BTreeMap, HashMap};

use crate::term::{Clause, Term, VarId};

/// Position in the trail; undoing to a mark restores the bindings present when it was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrailMark(usize);

/// Variable bindings plus the trail used to undo them on backtracking.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    bindings: HashMap<VarId, Term>,
    trail: Vec<VarId>,
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.bindings == other.bindings
    }
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, id: VarId) -> Option<&Term> {
        self.bindings.get(&id)
    }

    /// Follows variable bindings until reaching a non-variable or an unbound variable.
    pub fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var { id, .. } = t {
            match self.bindings.get(id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Applies the substitution all the way down.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound { functor, args } => {
                Term::Compound { functor: functor.clone(), args: args.iter().map(|a| self.resolve(a)).collect() }
            }
            other => other.clone(),
        }
    }

    pub fn mark(&self) -> TrailMark {
        TrailMark(self.trail.len())
    }

    pub fn undo_to(&mut self, mark: TrailMark) {
        for id in self.trail.drain(mark.0..) {
            self.bindings.remove(&id);
        }
    }

    fn bind(&mut self, id: VarId, value: Term) {
        debug_assert!(!matches!(&value, Term::Var { id: other, .. } if *other == id));
        self.bindings.insert(id, value);
        self.trail.push(id);
    }

    fn occurs(&self, id: VarId, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var { id: other, .. } => *other == id,
            Term::Compound { args, .. } => args.iter().any(|a| self.occurs(id, a)),
            _ => false,
        }
    }

    /// Unifies two terms with the occurs check. On failure nothing is left bound.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mark = self.mark();
        let ok = self.unify_inner(a, b);
        if !ok {
            self.undo_to(mark);
        }
        ok
    }

    fn unify_inner(&mut self, a: &Term, b: &Term) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.walk(&x).clone();
            let y = self.walk(&y).clone();
            match (x, y) {
                (Term::Var { id: i, .. }, Term::Var { id: j, .. }) if i == j => {}
                (Term::Var { id, .. }, other) | (other, Term::Var { id, .. }) => {
                    if self.occurs(id, &other) {
                        return false;
                    }
                    self.bind(id, other);
                }
                (Term::Compound { functor: f, args: xs }, Term::Compound { functor: g, args: ys }) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(xs.into_iter().zip(ys).rev());
                }
                (x, y) => {
                    if x != y {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Would `a` and `b` unify? Leaves the substitution untouched either way.
    pub fn unifiable(&mut self, a: &Term, b: &Term) -> bool {
        let mark = self.mark();
        let ok = self.unify_inner(a, b);
        self.undo_to(mark);
        ok
    }

    /// Bindings as an ordered map, for comparisons in tests and snapshots.
    pub fn snapshot(&self) -> BTreeMap<VarId, Term> {
        self.bindings.iter().map(|(k, v)| (*k, v.clone())).collect()
    }
}

/// Most general unifier extending `s`, or `None` if the terms do not unify.
pub fn unify(t1: &Term, t2: &Term, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    out.unify(t1, t2).then_some(out)
}

/// Copies a clause with every variable replaced by a fresh one carrying the same display name.
pub fn rename_apart(c: &Clause, next_var: &mut u64) -> Clause {
    let mut fresh: HashMap<VarId, VarId> = HashMap::new();
    let mut rename = |name: &str, id: VarId| {
        let new = *fresh.entry(id).or_insert_with(|| {
            let v = VarId(*next_var);
            *next_var += 1;
            v
        });
        Term::Var { name: name.to_string(), id: new }
    };
    Clause {
        id: c.id,
        head: c.head.map_vars(&mut rename),
        body: c.body.iter().map(|g| g.map_vars(&mut rename)).collect(),
        retracted: c.retracted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{format_term, parse_program, parse_term};

    fn v(name: &str, id: u64) -> Term {
        Term::var(name, id)
    }

    #[test]
    fn binds_variable_to_atom() {
        let s = unify(&v("X", 1), &Term::atom("a"), &Substitution::new()).unwrap();
        assert_eq!(s.get(VarId(1)), Some(&Term::atom("a")));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn append_base_case() {
        // appendList([],X,X) against appendList([],[b],Z)
        let x = v("X", 1);
        let z = v("Z", 2);
        let b_list = Term::list(vec![Term::atom("b")], None);
        let head = Term::compound("appendList", vec![Term::nil(), x.clone(), x.clone()]);
        let goal = Term::compound("appendList", vec![Term::nil(), b_list.clone(), z.clone()]);
        let s = unify(&head, &goal, &Substitution::new()).unwrap();
        assert_eq!(s.resolve(&x), b_list);
        assert_eq!(s.resolve(&z), b_list);
    }

    #[test]
    fn functor_clash_and_occurs_check_fail() {
        let x = v("X", 1);
        let empty = Substitution::new();
        assert!(unify(&Term::compound("f", vec![x.clone()]), &Term::compound("g", vec![x.clone()]), &empty).is_none());
        assert!(unify(&x, &Term::compound("f", vec![x.clone()]), &empty).is_none());
        // indirect cycle: X = f(Y), Y = X
        let y = v("Y", 2);
        let s = unify(&x, &Term::compound("f", vec![y.clone()]), &empty).unwrap();
        assert!(unify(&y, &x, &s).is_none());
    }

    #[test]
    fn failure_leaves_substitution_unchanged() {
        let mut s = Substitution::new();
        let a = parse_term("f(X, b)").unwrap();
        let b = parse_term("f(a, c)").unwrap();
        assert!(!s.unify(&a, &b));
        assert!(s.is_empty());
    }

    #[test]
    fn undo_restores_bindings_at_mark() {
        let mut s = Substitution::new();
        assert!(s.unify(&v("X", 1), &Term::atom("a")));
        let before = s.snapshot();
        let mark = s.mark();
        assert!(s.unify(&v("Y", 2), &Term::atom("b")));
        assert!(s.unify(&v("Z", 3), &v("Y", 2)));
        s.undo_to(mark);
        assert_eq!(s.snapshot(), before);
    }

    #[test]
    fn never_binds_variable_to_itself() {
        let mut s = Substitution::new();
        assert!(s.unify(&v("X", 1), &v("X", 1)));
        assert!(s.is_empty());
        assert!(s.unify(&v("X", 1), &v("Y", 2)));
        assert!(s.unify(&v("Y", 2), &v("X", 1)));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn rename_shares_ids_within_clause() {
        let p = parse_program("g(Y) :- k(Y).").unwrap();
        let mut counter = 100;
        let c = rename_apart(&p.clauses()[0], &mut counter);
        assert_eq!(counter, 101);
        assert_eq!(format_term(&c.to_term(), true), "g(Y):-k(Y)");
        assert_eq!(c.head.args()[0], c.body[0].args()[0]);
        assert_eq!(c.head.args()[0], Term::var("Y", 100));
    }

    #[test]
    fn rename_ground_fact_is_identity() {
        let p = parse_program("g(a).").unwrap();
        let mut counter = 7;
        let c = rename_apart(&p.clauses()[0], &mut counter);
        assert_eq!(c, p.clauses()[0]);
        assert_eq!(counter, 7);
    }

    #[test]
    fn rename_recursive_append_clause() {
        let p = parse_program("appendList([X|L1],L2,[X|List]) :- appendList(L1,L2,List).").unwrap();
        let mut counter = 50;
        let c = rename_apart(&p.clauses()[0], &mut counter);
        let vars = c.variables();
        assert_eq!(vars.len(), 4);
        assert_eq!(counter, 54);
        let args = c.head.args();
        let x1 = args[0].args()[0].clone();
        let x2 = args[2].args()[0].clone();
        assert_eq!(x1, x2);
        let original: Vec<VarId> = p.clauses()[0].variables().into_iter().map(|(_, id)| id).collect();
        assert!(vars.iter().all(|(_, id)| !original.contains(id)));
    }
}
