//! Tokenizer and recursive-descent parser shared by program files, queries
//! and grammar files.

use std::collections::HashMap;
use std::fmt;

use crate::constraint::Equation;
use crate::term::{Symbol, Term, Variable};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Quoted(String),
    Str(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Amp,
    Eq,
    Colon,
    Slash,
    At,
    LeftArrow,
    RightArrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "variable `{s}`"),
            Tok::Quoted(s) => write!(f, "'{s}'"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::At => f.write_str("`@`"),
            Tok::LeftArrow => f.write_str("`<-`"),
            Tok::RightArrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if c.is_ascii_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            };
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance!();
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                advance!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!();
                }
            }
            out.push((Tok::Number(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            advance!();
            let mut s = String::new();
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(SyntaxError::new(pos, "unterminated quoted symbol"));
                }
                let d = chars[i];
                if d == quote {
                    advance!();
                    break;
                }
                if d == '\\' && i + 1 < chars.len() {
                    advance!();
                    s.push(chars[i]);
                    advance!();
                    continue;
                }
                s.push(d);
                advance!();
            }
            if s.is_empty() {
                return Err(SyntaxError::new(pos, "empty quoted symbol"));
            }
            out.push((if quote == '"' { Tok::Str(s) } else { Tok::Quoted(s) }, pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        if two == "<-" || two == "->" {
            advance!();
            advance!();
            out.push((if two == "<-" { Tok::LeftArrow } else { Tok::RightArrow }, pos));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' => Tok::Amp,
            '=' => Tok::Eq,
            ':' => Tok::Colon,
            '/' => Tok::Slash,
            '@' => Tok::At,
            other => return Err(SyntaxError::new(pos, format!("unexpected character `{other}`"))),
        };
        advance!();
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A relational atom as written, with arbitrary term arguments.
#[derive(Debug, Clone)]
pub struct RawAtom {
    pub relation: Symbol,
    pub args: Vec<Term>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum RawItem {
    Atom(RawAtom),
    Equation(Equation, Pos),
}

#[derive(Debug, Clone)]
pub struct RawClause {
    pub head: RawAtom,
    /// Factor literal text and its position; `None` means factor 1.
    pub factor: Option<(String, Pos)>,
    pub body: Vec<RawItem>,
    pub pos: Pos,
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scope: HashMap<String, Variable>,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Parser, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
            scope: HashMap::new(),
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<Pos, SyntaxError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> SyntaxError {
        SyntaxError::new(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    /// Skips to just past the next `.` so parsing can resume.
    pub(crate) fn recover(&mut self) {
        while !self.at_eof() {
            if self.bump().0 == Tok::Dot {
                break;
            }
        }
    }

    pub(crate) fn reset_scope(&mut self) {
        self.scope.clear();
    }

    pub(crate) fn variable(&mut self, name: &str) -> Variable {
        if name == "_" {
            return Variable::fresh("_");
        }
        self.scope
            .entry(name.to_string())
            .or_insert_with(|| Variable::fresh(name))
            .clone()
    }

    fn symbol(&mut self) -> Option<(Symbol, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                let pos = self.bump().1;
                Some((Symbol::from(s.as_str()), pos))
            }
            _ => None,
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if *self.peek() != Tok::LParen {
            return Ok(args);
        }
        self.bump();
        loop {
            args.push(self.term()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
        Ok(args)
    }

    pub(crate) fn term(&mut self) -> Result<Term, SyntaxError> {
        if let Tok::Var(name) = self.peek().clone() {
            self.bump();
            return Ok(Term::Var(self.variable(&name)));
        }
        match self.symbol() {
            Some((sym, _)) => {
                let args = self.args()?;
                Ok(Term::App(sym, args))
            }
            None => Err(self.unexpected("a term")),
        }
    }

    fn atom(&mut self) -> Result<RawAtom, SyntaxError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) if s == "true" => {
                return Err(SyntaxError::new(pos, "`true` is not a relation"))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {}
            _ => return Err(self.unexpected("an atom")),
        }
        let (relation, pos) = self.symbol().expect("checked above");
        let args = self.args()?;
        Ok(RawAtom { relation, args, pos })
    }

    fn item(&mut self, out: &mut Vec<RawItem>) -> Result<(), SyntaxError> {
        let pos = self.pos();
        if matches!(self.peek(), Tok::Ident(s) if s == "true")
            && matches!(self.peek_at(1), Tok::Amp | Tok::Dot | Tok::Eof)
        {
            self.bump();
            return Ok(());
        }
        let lhs = self.term()?;
        if *self.peek() == Tok::Eq {
            self.bump();
            let rhs = self.term()?;
            out.push(RawItem::Equation(Equation::new(lhs, rhs), pos));
            return Ok(());
        }
        match lhs {
            Term::App(relation, args) => {
                out.push(RawItem::Atom(RawAtom { relation, args, pos }));
                Ok(())
            }
            Term::Var(_) => Err(SyntaxError::new(pos, "a variable cannot be used as a goal; expected `=`")),
        }
    }

    pub(crate) fn body(&mut self) -> Result<Vec<RawItem>, SyntaxError> {
        let mut items = Vec::new();
        self.item(&mut items)?;
        while *self.peek() == Tok::Amp {
            self.bump();
            self.item(&mut items)?;
        }
        Ok(items)
    }

    /// A factor literal: `0.7`, `1`, or `p/q`.
    pub(crate) fn number(&mut self) -> Result<(String, Pos), SyntaxError> {
        let pos = self.pos();
        let Tok::Number(n) = self.peek().clone() else {
            return Err(self.unexpected("a number"));
        };
        self.bump();
        if *self.peek() == Tok::Slash {
            self.bump();
            let Tok::Number(d) = self.peek().clone() else {
                return Err(self.unexpected("a denominator"));
            };
            self.bump();
            return Ok((format!("{n}/{d}"), pos));
        }
        Ok((n, pos))
    }

    pub(crate) fn clause(&mut self) -> Result<RawClause, SyntaxError> {
        self.reset_scope();
        let pos = self.pos();
        let head = self.atom()?;
        let mut factor = None;
        let mut body = Vec::new();
        if *self.peek() == Tok::LeftArrow {
            self.bump();
            if matches!(self.peek(), Tok::Number(_)) {
                factor = Some(self.number()?);
                if *self.peek() == Tok::Colon {
                    self.bump();
                    body = self.body()?;
                }
            } else {
                body = self.body()?;
            }
        }
        self.expect(Tok::Dot)?;
        Ok(RawClause {
            head,
            factor,
            body,
            pos,
        })
    }
}

/// Parses every clause, collecting one error per malformed clause.
pub fn parse_clauses(text: &str) -> Result<Vec<RawClause>, Vec<SyntaxError>> {
    let mut parser = Parser::new(text).map_err(|e| vec![e])?;
    let mut clauses = Vec::new();
    let mut errors = Vec::new();
    while !parser.at_eof() {
        match parser.clause() {
            Ok(c) => clauses.push(c),
            Err(e) => {
                errors.push(e);
                parser.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(clauses)
    } else {
        Err(errors)
    }
}

/// A parsed query: body items plus the named variables in order of first
/// occurrence.
#[derive(Debug, Clone)]
pub struct RawQuery {
    pub items: Vec<RawItem>,
    pub variables: Vec<Variable>,
}

pub fn parse_query(text: &str) -> Result<RawQuery, SyntaxError> {
    let mut parser = Parser::new(text)?;
    let items = if parser.at_eof() { Vec::new() } else { parser.body()? };
    if *parser.peek() == Tok::Dot {
        parser.bump();
    }
    if !parser.at_eof() {
        return Err(parser.unexpected("`&` or end of query"));
    }
    let mut variables: Vec<Variable> = Vec::new();
    let mut visit = |t: &Term| {
        t.collect_vars(&mut variables);
    };
    for item in &items {
        match item {
            RawItem::Atom(a) => a.args.iter().for_each(&mut visit),
            RawItem::Equation(e, _) => {
                visit(&e.lhs);
                visit(&e.rhs);
            }
        }
    }
    variables.retain(|v| !v.is_hidden());
    Ok(RawQuery { items, variables })
}
