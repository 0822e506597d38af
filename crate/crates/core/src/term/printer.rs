use super::reader::{infix_op, is_symbol_char, prefix_op, Assoc};
use super::{Clause, Term, CONS, NIL};

/// How unbound variables are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarStyle {
    /// The source name, e.g. `X` (anonymous variables print as `_`).
    #[default]
    Names,
    /// A run-unique name derived from the variable id, e.g. `_G12`.
    Ids,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TermFormatter {
    pub quoted: bool,
    pub vars: VarStyle,
}

/// Writes `t` in operator notation. With `quoting`, atoms that need quotes get them,
/// so the output reads back as the same term.
pub fn format_term(t: &Term, quoting: bool) -> String {
    TermFormatter { quoted: quoting, vars: VarStyle::Names }.format(t)
}

pub fn format_clause(c: &Clause) -> String {
    format_term(&c.to_term(), true)
}

impl TermFormatter {
    pub fn format(&self, t: &Term) -> String {
        let mut out = String::new();
        self.write(t, 1200, &mut out);
        out
    }

    fn write(&self, t: &Term, max: u32, out: &mut String) {
        match t {
            Term::Integer(n) => out.push_str(&n.to_string()),
            Term::Var { name, id } => match self.vars {
                VarStyle::Names => out.push_str(name),
                VarStyle::Ids => out.push_str(&format!("_G{}", id.0)),
            },
            Term::Atom(name) => {
                let text = self.atom_text(name);
                if max < 999 && (infix_op(name).is_some() || prefix_op(name).is_some()) {
                    out.push('(');
                    out.push_str(&text);
                    out.push(')');
                } else {
                    out.push_str(&text);
                }
            }
            Term::Compound { functor, args } if functor == CONS && args.len() == 2 => self.write_list(t, out),
            Term::Compound { functor, args } if args.len() == 2 && infix_op(functor).is_some() => {
                let (prec, assoc) = infix_op(functor).unwrap();
                let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
                let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
                let mut left = String::new();
                self.write(&args[0], left_max, &mut left);
                let mut right = String::new();
                self.write(&args[1], right_max, &mut right);
                let alpha = functor.chars().all(char::is_alphanumeric);
                let mut s = left;
                if alpha {
                    s.push(' ');
                    s.push_str(functor);
                    s.push(' ');
                } else {
                    if s.ends_with(is_symbol_char) {
                        s.push(' ');
                    }
                    s.push_str(functor);
                    if functor != "," && right.starts_with(is_symbol_char) {
                        s.push(' ');
                    }
                }
                s.push_str(&right);
                wrap(s, prec > max, out);
            }
            Term::Compound { functor, args }
                if args.len() == 1 && prefix_op(functor).is_some() && !matches!(args[0], Term::Integer(_)) =>
            {
                let prec = prefix_op(functor).unwrap();
                let mut arg = String::new();
                self.write(&args[0], prec, &mut arg);
                if arg.starts_with('(') {
                    // canonical form reads back as the same compound
                    out.push_str(functor);
                    out.push('(');
                    self.write(&args[0], 999, out);
                    out.push(')');
                    return;
                }
                let mut s = functor.clone();
                if arg.starts_with(is_symbol_char) || arg.starts_with(|c: char| c.is_ascii_digit()) {
                    s.push(' ');
                }
                s.push_str(&arg);
                wrap(s, prec > max, out);
            }
            Term::Compound { functor, args } => {
                out.push_str(&self.atom_text(functor));
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write(a, 999, out);
                }
                out.push(')');
            }
        }
    }

    fn write_list(&self, t: &Term, out: &mut String) {
        out.push('[');
        let mut cur = t;
        let mut first = true;
        loop {
            match cur {
                Term::Compound { functor, args } if functor == CONS && args.len() == 2 => {
                    if !first {
                        out.push(',');
                    }
                    first = false;
                    self.write(&args[0], 999, out);
                    cur = &args[1];
                }
                Term::Atom(a) if a == NIL => break,
                tail => {
                    out.push('|');
                    self.write(tail, 999, out);
                    break;
                }
            }
        }
        out.push(']');
    }

    fn atom_text(&self, name: &str) -> String {
        if !self.quoted || !needs_quotes(name) {
            return name.to_string();
        }
        let mut s = String::from("'");
        for c in name.chars() {
            match c {
                '\'' => s.push_str("\\'"),
                '\\' => s.push_str("\\\\"),
                '\n' => s.push_str("\\n"),
                '\t' => s.push_str("\\t"),
                c => s.push(c),
            }
        }
        s.push('\'');
        s
    }
}

fn wrap(s: String, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        out.push_str(&s);
        out.push(')');
    } else {
        out.push_str(&s);
    }
}

fn needs_quotes(name: &str) -> bool {
    if matches!(name, "[]" | "!" | ";") {
        return false;
    }
    let mut chars = name.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_lowercase() => !chars.all(|c| c == '_' || c.is_alphanumeric()),
        Some(_) if name.chars().all(is_symbol_char) => name == ".",
        Some(_) => true,
    }
}
