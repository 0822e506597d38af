use crate::term::{format_term, PredKey, Term};

use super::subst::Substitution;
use super::EngineError;

/// The closed set of built-in predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    True,
    Fail,
    Cut,
    Write,
    Nl,
    Unify,
    NotUnify,
    Identical,
    NotIdentical,
    Is,
    ArithEq,
    ArithNe,
    Less,
    Greater,
    LessEq,
    GreaterEq,
    AssertA,
    AssertZ,
    Retract,
    Var,
    Nonvar,
    Atom,
}

impl Builtin {
    pub fn lookup(key: &PredKey) -> Option<Builtin> {
        use Builtin::*;
        Some(match (key.name.as_str(), key.arity) {
            ("true", 0) => True,
            ("fail", 0) => Fail,
            ("!", 0) => Cut,
            ("write", 1) => Write,
            ("nl", 0) => Nl,
            ("=", 2) => Unify,
            ("\\=", 2) => NotUnify,
            ("==", 2) => Identical,
            ("\\==", 2) => NotIdentical,
            ("is", 2) => Is,
            ("=:=", 2) => ArithEq,
            ("=\\=", 2) => ArithNe,
            ("<", 2) => Less,
            (">", 2) => Greater,
            ("=<", 2) => LessEq,
            (">=", 2) => GreaterEq,
            ("asserta", 1) => AssertA,
            ("assertz", 1) => AssertZ,
            ("retract", 1) => Retract,
            ("var", 1) => Var,
            ("nonvar", 1) => Nonvar,
            ("atom", 1) => Atom,
            _ => return None,
        })
    }
}

pub fn is_builtin(goal: &Term) -> bool {
    goal.indicator().is_some_and(|k| Builtin::lookup(&k).is_some())
}

/// Evaluates an integer arithmetic expression.
pub fn eval(t: &Term, s: &Substitution) -> Result<i64, EngineError> {
    match s.walk(t) {
        Term::Integer(n) => Ok(*n),
        Term::Var { .. } => Err(EngineError::Instantiation),
        Term::Compound { functor, args } if args.len() == 1 && functor == "-" => {
            eval(&args[0], s)?.checked_neg().ok_or(EngineError::Evaluation("int_overflow"))
        }
        Term::Compound { functor, args } if args.len() == 2 => {
            let op = functor.as_str();
            if !matches!(op, "+" | "-" | "*" | "/" | "mod") {
                return Err(not_evaluable(t, s));
            }
            let a = eval(&args[0], s)?;
            let b = eval(&args[1], s)?;
            let r = match op {
                "+" => a.checked_add(b),
                "-" => a.checked_sub(b),
                "*" => a.checked_mul(b),
                "/" if b == 0 => return Err(EngineError::Evaluation("zero_divisor")),
                // truncates toward zero
                "/" => a.checked_div(b),
                "mod" if b == 0 => return Err(EngineError::Evaluation("zero_divisor")),
                // result takes the sign of the divisor
                _ => a.checked_rem(b).map(|r| if r != 0 && (r < 0) != (b < 0) { r + b } else { r }),
            };
            r.ok_or(EngineError::Evaluation("int_overflow"))
        }
        _ => Err(not_evaluable(t, s)),
    }
}

fn not_evaluable(t: &Term, s: &Substitution) -> EngineError {
    let culprit = match s.walk(t) {
        Term::Compound { functor, args } => format!("{}/{}", functor, args.len()),
        other => format_term(&s.resolve(other), true),
    };
    EngineError::Type { expected: "evaluable", culprit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn ev(src: &str) -> Result<i64, EngineError> {
        eval(&parse_term(src).unwrap(), &Substitution::new())
    }

    #[test]
    fn integer_arithmetic() {
        assert_eq!(ev("1 + 2 * 3"), Ok(7));
        assert_eq!(ev("7 / 2"), Ok(3));
        assert_eq!(ev("-7 / 2"), Ok(-3));
        assert_eq!(ev("-7 mod 2"), Ok(1));
        assert_eq!(ev("7 mod -2"), Ok(-1));
        assert_eq!(ev("- (3 - 5)"), Ok(2));
    }

    #[test]
    fn arithmetic_errors() {
        assert_eq!(ev("X + 1"), Err(EngineError::Instantiation));
        assert!(matches!(ev("a + 1"), Err(EngineError::Type { .. })));
        assert!(matches!(ev("f(1)"), Err(EngineError::Type { .. })));
        assert_eq!(ev("1 / 0"), Err(EngineError::Evaluation("zero_divisor")));
        assert_eq!(ev("9223372036854775807 + 1"), Err(EngineError::Evaluation("int_overflow")));
    }

    #[test]
    fn table_is_closed() {
        assert!(is_builtin(&parse_term("write(x)").unwrap()));
        assert!(is_builtin(&parse_term("!").unwrap()));
        assert!(!is_builtin(&parse_term("write(x, y)").unwrap()));
        assert!(!is_builtin(&parse_term("call(x)").unwrap()));
    }
}
