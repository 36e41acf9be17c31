//! Text syntax for programs.
//!
//! ```text
//! % comment
//! #sig score(personnel, number).
//! #domain personnel p1 p2.
//! insultsAvailable(p1).
//! not vitalsAvailable(p1).
//! @niss_only score(P, niss(P)) :- insultsAvailable(P), not vitalsAvailable(P).
//! ```
//!
//! Identifiers starting with an uppercase letter or `_` are variables. `not`
//! is strong negation. Rules without an explicit `@id` are numbered `r1`,
//! `r2`, ... in order of appearance.

use super::error::LogicError;
use super::program::{Domain, Program, Rule};
use super::term::{Atom, Constant, GroundLiteral, Literal, Term};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Var(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    At,
    Directive(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn error(line: usize, column: usize, message: impl Into<String>) -> LogicError {
    LogicError::Parse { line, column, message: message.into() }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, LogicError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |token: Token| out.push(Spanned { token, line: start_line, column: start_col });
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(Token::LParen),
            ')' => push(Token::RParen),
            ',' => push(Token::Comma),
            '.' => push(Token::Dot),
            '@' => push(Token::At),
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(Token::If);
                    i += 2;
                    col += 2;
                    continue;
                }
                return Err(error(line, col, "expected ':-'"));
            }
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                push(Token::Directive(chars[i + 1..j].iter().collect()));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if matches!(chars.get(j), Some('e' | 'E')) {
                    let mut k = j + 1;
                    if matches!(chars.get(k), Some('+' | '-')) {
                        k += 1;
                    }
                    if chars.get(k).is_some_and(|d| d.is_ascii_digit()) {
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let value = text.parse::<f64>().map_err(|e| error(line, col, format!("bad number {text}: {e}")))?;
                push(Token::Number(value));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                if c.is_uppercase() || c == '_' {
                    push(Token::Var(text));
                } else {
                    push(Token::Ident(text));
                }
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(error(line, col, format!("unexpected character {other:?}"))),
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn location(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(s) => (s.line, s.column),
            None => (1, 1),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, LogicError> {
        let (line, column) = self.location();
        Err(error(line, column, message))
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|s| s.token.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), LogicError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected {want:?}, found {t:?}");
                self.fail(msg)
            }
            None => self.fail(format!("expected {want:?}, found end of input")),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        match self.next() {
            Some(Token::Var(v)) => Ok(Term::Var(v)),
            Some(Token::Number(n)) => Ok(Term::num(n)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let args = self.arguments()?;
                    Ok(Term::apply(name, args))
                } else {
                    Ok(Term::sym(name))
                }
            }
            other => {
                self.pos -= 1;
                self.fail(format!("expected a term, found {other:?}"))
            }
        }
    }

    fn arguments(&mut self) -> Result<Vec<Term>, LogicError> {
        self.expect(Token::LParen)?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Token::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Token::RParen)?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Atom, LogicError> {
        match self.next() {
            Some(Token::Ident(name)) => {
                let terms = if self.peek() == Some(&Token::LParen) { self.arguments()? } else { Vec::new() };
                Ok(Atom::new(name, terms))
            }
            other => {
                self.pos -= 1;
                self.fail(format!("expected a predicate, found {other:?}"))
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, LogicError> {
        if self.peek() == Some(&Token::Ident("not".into()))
            && matches!(self.tokens.get(self.pos + 1).map(|s| &s.token), Some(Token::Ident(_)))
        {
            self.pos += 1;
            return Ok(Literal::neg(self.atom()?));
        }
        Ok(Literal::pos(self.atom()?))
    }

    fn directive(&mut self, name: &str, program: &mut Program) -> Result<(), LogicError> {
        match name {
            "sig" => {
                let predicate = match self.next() {
                    Some(Token::Ident(p)) => p,
                    _ => {
                        self.pos -= 1;
                        return self.fail("expected predicate name after #sig");
                    }
                };
                let mut domains = Vec::new();
                if self.peek() == Some(&Token::LParen) {
                    for t in self.arguments()? {
                        match t {
                            Term::Const(Constant::Sym(d)) => match Domain::parse(&d) {
                                Some(dom) => domains.push(dom),
                                None => return self.fail(format!("unknown domain {d}")),
                            },
                            other => return self.fail(format!("expected a domain name, found {other}")),
                        }
                    }
                }
                program.declare(&predicate, &domains);
            }
            "domain" => {
                let domain = match self.next() {
                    Some(Token::Ident(d)) => match Domain::parse(&d) {
                        Some(dom) => dom,
                        None => return self.fail(format!("unknown domain {d}")),
                    },
                    _ => return self.fail("expected a domain name after #domain"),
                };
                while self.peek() != Some(&Token::Dot) {
                    match self.next() {
                        Some(Token::Ident(c)) => program.register(domain, Constant::sym(c)),
                        Some(Token::Number(n)) => program.register(domain, Constant::num(n)),
                        Some(Token::Comma) => {}
                        _ => {
                            self.pos -= 1;
                            return self.fail("expected a constant");
                        }
                    }
                }
            }
            other => return self.fail(format!("unknown directive #{other}")),
        }
        self.expect(Token::Dot)
    }
}

/// Parses a program from its text form.
pub fn parse_program(src: &str) -> Result<Program, LogicError> {
    let mut parser = Parser { tokens: tokenize(src)?, pos: 0 };
    let mut program = Program::new();
    let mut facts = Vec::new();
    let mut auto_id = 0usize;
    while let Some(token) = parser.peek().cloned() {
        if let Token::Directive(name) = token {
            parser.pos += 1;
            parser.directive(&name, &mut program)?;
            continue;
        }
        let explicit_id = if token == Token::At {
            parser.pos += 1;
            match parser.next() {
                Some(Token::Ident(id)) | Some(Token::Var(id)) => Some(id),
                _ => return parser.fail("expected a rule id after '@'"),
            }
        } else {
            None
        };
        let head = parser.literal()?;
        let mut body = Vec::new();
        if parser.peek() == Some(&Token::If) {
            parser.pos += 1;
            body.push(parser.literal()?);
            while parser.peek() == Some(&Token::Comma) {
                parser.pos += 1;
                body.push(parser.literal()?);
            }
        }
        parser.expect(Token::Dot)?;
        let ground_head = head.atom.to_ground();
        match (explicit_id, body.is_empty(), ground_head) {
            (None, true, Some(atom)) => facts.push(GroundLiteral { atom, negated: head.negated }),
            (id, _, _) => {
                auto_id += 1;
                let id = id.unwrap_or_else(|| format!("r{auto_id}"));
                program.add_rule(Rule::new(id, head, body));
            }
        }
    }
    for fact in facts {
        program.add_fact(fact)?;
    }
    Ok(program)
}

/// Parses a single atom pattern such as `assign_a(p1, A)`.
pub fn parse_atom(src: &str) -> Result<Atom, LogicError> {
    let mut parser = Parser { tokens: tokenize(src)?, pos: 0 };
    let atom = parser.atom()?;
    if parser.peek() == Some(&Token::Dot) {
        parser.pos += 1;
    }
    if parser.peek().is_some() {
        return parser.fail("trailing input after atom");
    }
    Ok(atom)
}

/// Parses a literal, optionally prefixed with `not`.
pub fn parse_literal(src: &str) -> Result<Literal, LogicError> {
    let mut parser = Parser { tokens: tokenize(src)?, pos: 0 };
    let lit = parser.literal()?;
    if parser.peek() == Some(&Token::Dot) {
        parser.pos += 1;
    }
    if parser.peek().is_some() {
        return parser.fail("trailing input after literal");
    }
    Ok(lit)
}
