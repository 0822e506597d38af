//! Tokenizer and operator-precedence reader for the supported Prolog subset.

use std::collections::HashMap;
use std::fmt;

use super::{split_clause, Program, Term, VarId};

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

pub(crate) fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "==" | "\\==" | "is" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" => (700, Assoc::Xfx),
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" | "mod" => (400, Assoc::Yfx),
        _ => return None,
    })
}

pub(crate) fn prefix_op(name: &str) -> Option<u32> {
    (name == "-").then_some(200)
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    QuotedName(String),
    Var(String),
    Int(i64),
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) | Tok::QuotedName(n) => format!("`{n}`"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Open => "`(`".into(),
            Tok::Close => "`)`".into(),
            Tok::OpenList => "`[`".into(),
            Tok::CloseList => "`]`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of clause `.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    /// Whitespace or a comment directly precedes this token.
    layout_before: bool,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().peekable(), line: 1, column: 1 }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError { line: self.line, column: self.column, message: message.into() }
    }

    fn skip_layout(&mut self) -> Result<bool, SyntaxError> {
        let mut skipped = false;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                Some('/') if self.peek2() == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return Err(self.error("unterminated block comment")),
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                        }
                    }
                }
                _ => return Ok(skipped),
            }
            skipped = true;
        }
    }

    fn tokenize(mut self) -> Result<Vec<Token>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            let layout_before = self.skip_layout()?;
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, column, layout_before });
                return Ok(out);
            };
            let tok = match c {
                '(' => self.single(Tok::Open),
                ')' => self.single(Tok::Close),
                '[' => self.single(Tok::OpenList),
                ']' => self.single(Tok::CloseList),
                '|' => self.single(Tok::Bar),
                ',' => self.single(Tok::Comma),
                '!' => self.single(Tok::Name("!".into())),
                ';' => self.single(Tok::Name(";".into())),
                '\'' => Tok::QuotedName(self.quoted()?),
                '0'..='9' => {
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    let value = digits.parse::<i64>().map_err(|_| SyntaxError {
                        line,
                        column,
                        message: format!("integer {digits} out of range"),
                    })?;
                    Tok::Int(value)
                }
                c if c == '_' || c.is_uppercase() => Tok::Var(self.take_while(is_alnum)),
                c if c.is_alphabetic() => Tok::Name(self.take_while(is_alnum)),
                '.' if matches!(self.peek2(), None | Some('%')) || self.peek2().is_some_and(char::is_whitespace) => {
                    self.bump();
                    Tok::End
                }
                c if is_symbol_char(c) => Tok::Name(self.take_while(is_symbol_char)),
                other => return Err(self.error(format!("unexpected character `{other}`"))),
            };
            out.push(Token { tok, line, column, layout_before });
        }
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| pred(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn quoted(&mut self) -> Result<String, SyntaxError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated quoted atom")),
                Some('\'') if self.peek() == Some('\'') => {
                    self.bump();
                    s.push('\'');
                }
                Some('\'') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('\\') => s.push('\\'),
                    Some('\'') => s.push('\''),
                    Some('\n') => {}
                    Some(other) => return Err(self.error(format!("unknown escape `\\{other}`"))),
                    None => return Err(self.error("unterminated quoted atom")),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

fn is_alnum(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Recursive-descent reader with operator-precedence climbing.
struct Reader {
    tokens: Vec<Token>,
    pos: usize,
    /// Named variables of the clause being read.
    vars: HashMap<String, VarId>,
    next_var: u64,
}

type Parsed = Result<(Term, u32), SyntaxError>;

impl Reader {
    fn new(src: &str, first_var: u64) -> Result<Self, SyntaxError> {
        Ok(Reader { tokens: Lexer::new(src).tokenize()?, pos: 0, vars: HashMap::new(), next_var: first_var })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> SyntaxError {
        let t = self.peek();
        SyntaxError {
            line: t.line,
            column: t.column,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), SyntaxError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn fresh_var(&mut self, name: &str) -> Term {
        if name != "_" {
            if let Some(&id) = self.vars.get(name) {
                return Term::Var { name: name.to_string(), id };
            }
        }
        let id = VarId(self.next_var);
        self.next_var += 1;
        if name != "_" {
            self.vars.insert(name.to_string(), id);
        }
        Term::Var { name: name.to_string(), id }
    }

    fn at_term_start(&self, offset: usize) -> bool {
        match &self.peek_at(offset).tok {
            Tok::Name(n) => {
                let functional = {
                    let next = self.peek_at(offset + 1);
                    next.tok == Tok::Open && !next.layout_before
                };
                infix_op(n).is_none() || prefix_op(n).is_some() || functional
            }
            Tok::QuotedName(_) | Tok::Var(_) | Tok::Int(_) | Tok::Open | Tok::OpenList => true,
            _ => false,
        }
    }

    fn parse(&mut self, max: u32) -> Parsed {
        let (mut left, mut left_prec) = self.primary(max)?;
        loop {
            let name = match &self.peek().tok {
                Tok::Name(n) => n.clone(),
                Tok::Comma => ",".to_string(),
                _ => break,
            };
            let Some((prec, assoc)) = infix_op(&name) else { break };
            if prec > max {
                break;
            }
            let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
            let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
            if left_prec > left_max {
                break;
            }
            self.advance();
            let (right, _) = self.parse(right_max)?;
            left = Term::compound(name, vec![left, right]);
            left_prec = prec;
        }
        Ok((left, left_prec))
    }

    fn primary(&mut self, max: u32) -> Parsed {
        let token = self.peek().clone();
        match token.tok {
            Tok::Int(n) => {
                self.advance();
                Ok((Term::Integer(n), 0))
            }
            Tok::Var(name) => {
                self.advance();
                Ok((self.fresh_var(&name), 0))
            }
            Tok::Open => {
                self.advance();
                let (t, _) = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((t, 0))
            }
            Tok::OpenList => {
                self.advance();
                if self.peek().tok == Tok::CloseList {
                    self.advance();
                    return Ok((Term::nil(), 0));
                }
                let mut items = vec![self.parse(999)?.0];
                while self.peek().tok == Tok::Comma {
                    self.advance();
                    items.push(self.parse(999)?.0);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.advance();
                    Some(self.parse(999)?.0)
                } else {
                    None
                };
                self.expect(Tok::CloseList, "`,`, `|` or `]`")?;
                Ok((Term::list(items, tail), 0))
            }
            Tok::Name(ref name) | Tok::QuotedName(ref name) => {
                let quoted = matches!(token.tok, Tok::QuotedName(_));
                let name = name.clone();
                self.advance();
                let next = self.peek().clone();
                if next.tok == Tok::Open && !next.layout_before {
                    self.advance();
                    let mut args = vec![self.parse(999)?.0];
                    while self.peek().tok == Tok::Comma {
                        self.advance();
                        args.push(self.parse(999)?.0);
                    }
                    self.expect(Tok::Close, "`,` or `)`")?;
                    return Ok((Term::compound(name, args), 0));
                }
                if quoted {
                    return Ok((Term::Atom(name), 0));
                }
                if let Some(prec) = prefix_op(&name) {
                    if let Tok::Int(n) = next.tok {
                        if !next.layout_before {
                            self.advance();
                            return Ok((Term::Integer(-n), 0));
                        }
                    }
                    if prec <= max && self.at_term_start(0) {
                        let (arg, _) = self.parse(prec)?;
                        return Ok((Term::compound(name, vec![arg]), prec));
                    }
                }
                Ok((Term::Atom(name), 0))
            }
            _ => Err(self.error_here("a term")),
        }
    }

    /// Reads one term terminated by `.`; `Ok(None)` at end of input.
    fn clause_term(&mut self, allow_eof_end: bool) -> Result<Option<(Term, usize, usize)>, SyntaxError> {
        if self.peek().tok == Tok::Eof {
            return Ok(None);
        }
        let (line, column) = (self.peek().line, self.peek().column);
        self.vars.clear();
        let (term, _) = self.parse(1200)?;
        match self.peek().tok {
            Tok::End => {
                self.advance();
            }
            Tok::Eof if allow_eof_end => {}
            _ => return Err(self.error_here("an operator or end of clause `.`")),
        }
        Ok(Some((term, line, column)))
    }
}

/// Parses a program text into clauses in source order.
pub fn parse_program(source: &str) -> Result<Program, SyntaxError> {
    let mut reader = Reader::new(source, 1)?;
    let mut program = Program::new();
    while let Some((term, line, column)) = reader.clause_term(false)? {
        let (head, body) = split_clause(term).map_err(|e| SyntaxError { line, column, message: e.to_string() })?;
        program.add_last(head, body);
    }
    Ok(program)
}

/// Parses `?- G1, ..., Gn.` (the `?-` and the final `.` are optional) into its goals.
pub fn parse_query(source: &str) -> Result<Vec<Term>, SyntaxError> {
    parse_query_from(source, 1)
}

pub(crate) fn parse_query_from(source: &str, first_var: u64) -> Result<Vec<Term>, SyntaxError> {
    let mut reader = Reader::new(source, first_var)?;
    if reader.peek().tok == Tok::Name("?-".into()) {
        reader.advance();
    }
    let Some((term, _, _)) = reader.clause_term(true)? else {
        return Err(reader.error_here("a query"));
    };
    if reader.peek().tok != Tok::Eof {
        return Err(reader.error_here("end of query"));
    }
    Ok(term.conjuncts())
}

/// Parses a single term; a trailing `.` is optional.
pub fn parse_term(source: &str) -> Result<Term, SyntaxError> {
    let mut reader = Reader::new(source, 1)?;
    let Some((term, _, _)) = reader.clause_term(true)? else {
        return Err(reader.error_here("a term"));
    };
    if reader.peek().tok != Tok::Eof {
        return Err(reader.error_here("end of input"));
    }
    Ok(term)
}
