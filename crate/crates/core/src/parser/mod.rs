//! Reader for the `.aspmtqs` input language.
//!
//! ```text
//! sorts      step :: 0..2.   colour :: {red, green}.
//! objects    a, b :: circle.  p :: polygon(4).
//! constants  moved(circle, step) :: boolean.  level(step) :: step.
//! variables  C :: circle.  T :: step.
//! rccEC(a, b, 0).
//! moved(C, T) <- not rccEQ(C, b, T).
//! {move(C, T)}.
//! <- moved(a, 0) & moved(b, 0).
//! ```
//!
//! `%` starts a line comment. Precedence from tightest: `not`, `&`, `|`,
//! `->` (right associative). `<-` is lexed greedily, so write `x < -3`
//! with a space.

pub mod sexpr;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::*;

pub use sexpr::{parse_solver_model, ModelBinding, ModelValue, SExpr};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}:{}: {message}{}", span.line, span.column, expected_suffix(expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Decimal(BigRational),
    Dot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    ColonColon,
    DotDot,
    Amp,
    Pipe,
    Arrow,
    LArrow,
    Le,
    Ge,
    Lt,
    Gt,
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Var(s) => return write!(f, "`{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::Decimal(d) => return write!(f, "`{}`", format_decimal(d)),
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::ColonColon => "::",
            Tok::DotDot => "..",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::LArrow => "<-",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            line_start = i + 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let span_at = |end: usize| SourceSpan { start, end, line, column: start - line_start + 1 };
        let two = if i + 1 < bytes.len() { &bytes[i..i + 2] } else { &bytes[i..i + 1] };
        let (tok, len) = if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            let word = text[i..j].to_string();
            let tok = if c.is_ascii_uppercase() || c == b'_' { Tok::Var(word) } else { Tok::Ident(word) };
            (tok, j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                let int_end = j;
                j += 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let digits = format!("{}{}", &text[i..int_end], &text[int_end + 1..j]);
                let scale = j - int_end - 1;
                let numer: BigInt = digits.parse().unwrap();
                let denom = BigInt::from(10u32).pow(scale as u32);
                (Tok::Decimal(BigRational::new(numer, denom)), j - i)
            } else {
                match text[i..j].parse::<i64>() {
                    Ok(v) => (Tok::Int(v), j - i),
                    Err(_) => {
                        return Err(ParseError {
                            span: span_at(j),
                            message: "integer literal out of range".into(),
                            expected: vec![],
                        })
                    }
                }
            }
        } else {
            match two {
                b"::" => (Tok::ColonColon, 2),
                b".." => (Tok::DotDot, 2),
                b"->" => (Tok::Arrow, 2),
                b"<-" => (Tok::LArrow, 2),
                b"<=" => (Tok::Le, 2),
                b">=" => (Tok::Ge, 2),
                b"!=" => (Tok::Ne, 2),
                _ => match c {
                    b'.' => (Tok::Dot, 1),
                    b',' => (Tok::Comma, 1),
                    b'(' => (Tok::LParen, 1),
                    b')' => (Tok::RParen, 1),
                    b'{' => (Tok::LBrace, 1),
                    b'}' => (Tok::RBrace, 1),
                    b'&' => (Tok::Amp, 1),
                    b'|' => (Tok::Pipe, 1),
                    b'<' => (Tok::Lt, 1),
                    b'>' => (Tok::Gt, 1),
                    b'=' => (Tok::Eq, 1),
                    b'+' => (Tok::Plus, 1),
                    b'-' => (Tok::Minus, 1),
                    b'*' => (Tok::Star, 1),
                    _ => {
                        let ch = text[i..].chars().next().unwrap();
                        return Err(ParseError {
                            span: span_at(i + ch.len_utf8()),
                            message: format!("unexpected character `{ch}`"),
                            expected: vec![],
                        });
                    }
                },
            }
        };
        out.push(Token { tok, span: span_at(i + len) });
        i += len;
    }
    let end = text.len();
    out.push(Token { tok: Tok::Eof, span: SourceSpan { start: end, end, line, column: end - line_start + 1 } });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    None,
    Sorts,
    Objects,
    Constants,
    Variables,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// 0-ary non-boolean constants: a bare name on the left of `=` is a
    /// function equality rather than an object comparison.
    nullary_functions: BTreeSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn block_keyword(&self) -> Option<Block> {
        let Tok::Ident(word) = self.peek() else { return None };
        if matches!(self.peek_at(1), Tok::ColonColon | Tok::LParen | Tok::Comma) {
            return None;
        }
        match word.as_str() {
            "sorts" => Some(Block::Sorts),
            "objects" => Some(Block::Objects),
            "constants" => Some(Block::Constants),
            "variables" => Some(Block::Variables),
            _ => None,
        }
    }

    /// A statement is a declaration iff a `::` occurs before its final `.`.
    fn statement_is_declaration(&self) -> bool {
        let mut k = self.pos;
        let mut depth = 0i32;
        while k < self.toks.len() {
            match &self.toks[k].tok {
                Tok::ColonColon => return true,
                Tok::LBrace | Tok::LParen => depth += 1,
                Tok::RBrace | Tok::RParen => depth -= 1,
                Tok::Dot if depth <= 0 => return false,
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
        false
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        let mut block = Block::None;
        let mut in_clauses = false;
        while *self.peek() != Tok::Eof {
            if let Some(b) = self.block_keyword() {
                if in_clauses {
                    return Err(ParseError {
                        span: self.span(),
                        message: "declarations must precede all clauses".into(),
                        expected: vec![],
                    });
                }
                self.bump();
                block = b;
                continue;
            }
            if self.statement_is_declaration() {
                if in_clauses {
                    return Err(ParseError {
                        span: self.span(),
                        message: "declarations must precede all clauses".into(),
                        expected: vec![],
                    });
                }
                self.declaration(block, &mut program)?;
            } else {
                if !in_clauses {
                    in_clauses = true;
                    self.nullary_functions = program
                        .constants
                        .iter()
                        .filter(|c| c.args.is_empty() && c.result != SortRef::Boolean)
                        .map(|c| c.name.clone())
                        .collect();
                }
                self.clause(&mut program.rules)?;
            }
        }
        Ok(program)
    }

    fn sort_ref(&mut self) -> PResult<SortRef> {
        let name = self.ident()?;
        Ok(match name.as_str() {
            "boolean" => SortRef::Boolean,
            "real" => SortRef::Real,
            "polygon" => {
                self.expect(Tok::LParen)?;
                let n = match self.peek().clone() {
                    Tok::Int(n) if n >= 0 => {
                        self.bump();
                        n as usize
                    }
                    _ => return self.error(&["vertex count"]),
                };
                self.expect(Tok::RParen)?;
                SortRef::Polygon(n)
            }
            _ => SortRef::Named(name),
        })
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.error(&["integer"]),
        }
    }

    fn declaration(&mut self, block: Block, program: &mut Program) -> PResult<()> {
        let start = self.span();
        // Left-hand side: a comma-separated list of names, or one constant
        // with an argument sort list.
        let mut names = Vec::new();
        let mut arg_sorts: Option<Vec<SortRef>> = None;
        let mut uppercase = false;
        loop {
            match self.peek().clone() {
                Tok::Ident(n) => {
                    self.bump();
                    names.push(n);
                }
                Tok::Var(n) => {
                    self.bump();
                    uppercase = true;
                    names.push(n);
                }
                _ => return self.error(&["name"]),
            }
            if names.len() == 1 && *self.peek() == Tok::LParen {
                self.bump();
                let mut sorts = vec![self.sort_ref()?];
                while self.eat(&Tok::Comma) {
                    sorts.push(self.sort_ref()?);
                }
                self.expect(Tok::RParen)?;
                arg_sorts = Some(sorts);
                break;
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::ColonColon)?;
        let block = match block {
            Block::None => {
                if arg_sorts.is_some() {
                    Block::Constants
                } else if uppercase {
                    Block::Variables
                } else if matches!(self.peek(), Tok::LBrace | Tok::Int(_) | Tok::Minus) {
                    Block::Sorts
                } else {
                    Block::Objects
                }
            }
            b => b,
        };
        let span = |p: &Parser| SourceSpan { end: p.toks[p.pos.saturating_sub(1)].span.end, ..start };
        if uppercase && block != Block::Variables {
            return Err(ParseError { span: start, message: "uppercase names denote variables".into(), expected: vec![] });
        }
        if arg_sorts.is_some() && block != Block::Constants {
            return Err(ParseError { span: start, message: "argument sorts are only allowed on constants".into(), expected: vec![] });
        }
        match block {
            Block::Sorts => {
                let kind = if self.eat(&Tok::LBrace) {
                    let mut members = Vec::new();
                    if *self.peek() != Tok::RBrace {
                        members.push(self.ident()?);
                        while self.eat(&Tok::Comma) {
                            members.push(self.ident()?);
                        }
                    }
                    self.expect(Tok::RBrace)?;
                    SortKind::Enumerated(members)
                } else {
                    let lo = self.signed_int()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.signed_int()?;
                    SortKind::Range { lo, hi }
                };
                self.expect(Tok::Dot)?;
                let span = span(self);
                for name in names {
                    program.sorts.push(SortDecl { name, kind: kind.clone(), span });
                }
            }
            Block::Objects => {
                let sort = self.sort_ref()?;
                self.expect(Tok::Dot)?;
                let span = span(self);
                for name in names {
                    program.objects.push(ObjectDecl { name, sort: sort.clone(), span });
                }
            }
            Block::Constants => {
                let result = self.sort_ref()?;
                self.expect(Tok::Dot)?;
                let span = span(self);
                let args = arg_sorts.unwrap_or_default();
                for name in names {
                    program.constants.push(ConstantDecl { name, args: args.clone(), result: result.clone(), span });
                }
            }
            Block::Variables => {
                if !uppercase {
                    return Err(ParseError { span: start, message: "variables must start with an uppercase letter".into(), expected: vec![] });
                }
                let sort = self.sort_ref()?;
                self.expect(Tok::Dot)?;
                let span = span(self);
                for name in names {
                    program.variables.push(VariableDecl { name, sort: sort.clone(), span });
                }
            }
            Block::None => unreachable!(),
        }
        Ok(())
    }

    fn clause(&mut self, rules: &mut Vec<Rule>) -> PResult<()> {
        let start = self.span();
        let finish = |p: &Parser| SourceSpan { end: p.toks[p.pos.saturating_sub(1)].span.end, ..start };
        if self.eat(&Tok::LArrow) {
            let body = self.formula()?;
            self.expect(Tok::Dot)?;
            rules.push(Rule { head: Formula::Bottom, body, choice: false, span: finish(self) });
            return Ok(());
        }
        if self.eat(&Tok::LBrace) {
            let head = self.formula()?;
            self.expect(Tok::RBrace)?;
            let body = if self.eat(&Tok::LArrow) { self.formula()? } else { Formula::Top };
            self.expect(Tok::Dot)?;
            if !matches!(head, Formula::Atom { .. } | Formula::FnEq { .. }) {
                return Err(ParseError {
                    span: start,
                    message: "choice head must be an atom or function equality".into(),
                    expected: vec![],
                });
            }
            rules.push(Rule { head, body, choice: true, span: finish(self) });
            return Ok(());
        }
        let first = self.formula()?;
        let (head, body) = if self.eat(&Tok::LArrow) {
            (first, self.formula()?)
        } else {
            match first {
                Formula::Implies(b, h) if *h != Formula::Bottom => (*h, *b),
                other => (other, Formula::Top),
            }
        };
        self.expect(Tok::Dot)?;
        let span = finish(self);
        push_normalized(rules, head, body, span);
        Ok(())
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> PResult<Formula> {
        if matches!(self.peek(), Tok::Ident(w) if w == "not") {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::LParen => {
                let saved = self.pos;
                self.bump();
                if let Ok(f) = self.formula() {
                    if self.eat(&Tok::RParen) && !is_term_continuation(self.peek()) {
                        return Ok(f);
                    }
                }
                self.pos = saved;
                self.comparison_or_atom()
            }
            _ => self.comparison_or_atom(),
        }
    }

    fn comparison_or_atom(&mut self) -> PResult<Formula> {
        let start = self.span();
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Gt => Some(CmpOp::Gt),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.term()?;
            if op == CmpOp::Eq {
                match lhs {
                    Term::App(..) => return Ok(Formula::fn_eq(lhs, rhs)),
                    Term::Sym(ref s) if self.nullary_functions.contains(s) => {
                        return Ok(Formula::fn_eq(Term::App(s.clone(), vec![]), rhs))
                    }
                    _ => {}
                }
            }
            let fix = |t: Term, p: &Parser| match t {
                Term::Sym(s) if p.nullary_functions.contains(&s) => Term::App(s, vec![]),
                t => t,
            };
            let lhs = fix(lhs, self);
            let rhs = fix(rhs, self);
            return Ok(Formula::cmp(lhs, op, rhs));
        }
        match lhs {
            Term::App(pred, args) => Ok(Formula::Atom { pred, args }),
            Term::Sym(pred) => Ok(Formula::Atom { pred, args: vec![] }),
            _ => Err(ParseError {
                span: start,
                message: "expected an atom or a comparison".into(),
                expected: vec!["comparison operator".into()],
            }),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Term::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Term::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary_term()?;
        while self.eat(&Tok::Star) {
            lhs = Term::Mul(Box::new(lhs), Box::new(self.unary_term()?));
        }
        Ok(lhs)
    }

    fn unary_term(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.unary_term()? {
                Term::Int(i) => Term::Int(-i),
                Term::Num(n) => Term::Num(-n),
                t => Term::Neg(Box::new(t)),
            });
        }
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Decimal(d) => {
                self.bump();
                Ok(Term::Num(d))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(w) if !matches!(w.as_str(), "not" | "true" | "false") => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.term()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::App(w, args))
                } else {
                    Ok(Term::Sym(w))
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.error(&["term"]),
        }
    }
}

fn is_term_continuation(t: &Tok) -> bool {
    matches!(t, Tok::Lt | Tok::Le | Tok::Eq | Tok::Ne | Tok::Ge | Tok::Gt | Tok::Plus | Tok::Minus | Tok::Star)
}

/// Turn `head <- body` into rules whose heads are atomic, `false`, or a
/// disjunction left for the spatial-head stage to judge.
fn push_normalized(rules: &mut Vec<Rule>, head: Formula, body: Formula, span: SourceSpan) {
    match head {
        Formula::Top => {}
        Formula::And(parts) => {
            for p in parts {
                push_normalized(rules, p, body.clone(), span);
            }
        }
        Formula::Implies(cond, h) => {
            if *h == Formula::Bottom {
                rules.push(Rule { head: Formula::Bottom, body: conjoin(body, *cond), choice: false, span });
            } else {
                push_normalized(rules, *h, conjoin(body, *cond), span);
            }
        }
        head => rules.push(Rule { head, body, choice: false, span }),
    }
}

fn conjoin(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::Top, b) => b,
        (a, Formula::Top) => a,
        (Formula::And(mut xs), b) => {
            xs.push(b);
            Formula::And(xs)
        }
        (a, b) => Formula::And(vec![a, b]),
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, nullary_functions: BTreeSet::new() };
    p.program()
}

/// Parse a standalone formula (a query) against a program's declarations.
pub fn parse_formula(text: &str, program: &Program) -> Result<Formula, ParseError> {
    let nullary_functions = program
        .constants
        .iter()
        .filter(|c| c.args.is_empty() && c.result != SortRef::Boolean)
        .map(|c| c.name.clone())
        .collect();
    let mut p = Parser { toks: lex(text)?, pos: 0, nullary_functions };
    let f = p.formula()?;
    p.eat(&Tok::Dot);
    if *p.peek() != Tok::Eof {
        return p.error(&["end of input"]);
    }
    Ok(f)
}

/// Parse a rational from the surface syntax `3`, `-1.25` or `1/3`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n.trim().parse().ok()?, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = match body.split_once('.') {
        Some((i, f)) => {
            if i.is_empty() || f.is_empty() || !i.bytes().chain(f.bytes()).all(|b| b.is_ascii_digit()) {
                return None;
            }
            let numer: BigInt = format!("{i}{f}").parse().ok()?;
            BigRational::new(numer, BigInt::from(10u32).pow(f.len() as u32))
        }
        None => {
            if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            BigRational::from_integer(body.parse().ok()?)
        }
    };
    Some(if neg && value.is_positive() { -value } else { value })
}
