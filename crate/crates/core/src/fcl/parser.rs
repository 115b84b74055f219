//! Line-oriented lexer and recursive-descent parser for rule files.

use std::fmt;

use thiserror::Error;

use super::{
    BodyItem, ChainError, DeonticLiteral, Head, Modality, ReparationChain, Rule, RuleSet,
    RuleSetError,
};
use crate::model::{is_identifier, is_node_id, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    BadCharacter(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("`{0}` is not a valid literal atom")]
    BadAtom(String),
    #[error("`{0}` is not a valid rule id")]
    BadRuleId(String),
    #[error("unknown modality `{0}`")]
    UnknownModality(String),
    #[error("reparation chains are only allowed in rule heads")]
    ChainInBody,
    #[error("{0}")]
    Chain(ChainError),
    #[error("{0}")]
    RuleSet(RuleSetError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Tilde,
    Colon,
    Comma,
    Arrow,
    Gt,
    LBracket,
    RBracket,
    Otimes,
    LBrace,
    RBrace,
    Eol,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Otimes => f.write_str("`(x)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Eol => f.write_str("end of line"),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

/// Tokens of one line with their 1-based columns; the last token is `Eol`.
fn lex_line(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, kind| ParseError {
        line: lineno,
        column: col,
        kind,
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let single = match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '~' => Some(Tok::Tilde),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '>' => Some(Tok::Gt),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '⊗' => Some(Tok::Otimes),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c == '=' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, col));
            i += 2;
        } else if c == '(' && chars.get(i + 1) == Some(&'x') && chars.get(i + 2) == Some(&')') {
            out.push((Tok::Otimes, col));
            i += 3;
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Word(chars[start..i].iter().collect()), col));
        } else {
            return Err(err(col, ParseErrorKind::BadCharacter(c)));
        }
    }
    out.push((Tok::Eol, chars.len() + 1));
    Ok(out)
}

struct LineParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

enum Statement {
    Rule(Rule, usize),
    Superiority(String, String, usize),
}

impl LineParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_at(
            self.col(),
            ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found: self.peek().to_string(),
            },
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn word(&mut self, expected: &str) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Tok::Word(_) => match self.bump() {
                Tok::Word(w) => Ok((w, col)),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected(expected)),
        }
    }

    fn rule_id(&mut self) -> Result<(String, usize), ParseError> {
        let (w, col) = self.word("a rule id")?;
        if !is_node_id(&w) {
            return Err(self.error_at(col, ParseErrorKind::BadRuleId(w)));
        }
        Ok((w, col))
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let (id, col) = self.rule_id()?;
        match self.peek() {
            Tok::Colon => {
                self.bump();
                let rule = self.rule_rest(id)?;
                Ok(Statement::Rule(rule, col))
            }
            Tok::Gt => {
                self.bump();
                let (loser, _) = self.rule_id()?;
                self.expect(Tok::Eol)?;
                Ok(Statement::Superiority(id, loser, col))
            }
            _ => Err(self.unexpected("`:` or `>`")),
        }
    }

    fn rule_rest(&mut self, id: String) -> Result<Rule, ParseError> {
        let mut body = Vec::new();
        if *self.peek() != Tok::Arrow {
            loop {
                body.push(self.body_item()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::Arrow => break,
                    Tok::Otimes => {
                        return Err(self.error_at(self.col(), ParseErrorKind::ChainInBody))
                    }
                    _ => return Err(self.unexpected("`,` or `=>`")),
                }
            }
        }
        self.expect(Tok::Arrow)?;
        let head = self.head()?;
        let mut terminates = Vec::new();
        if matches!(self.peek(), Tok::Word(w) if w == "terminates") {
            self.bump();
            self.expect(Tok::LBrace)?;
            loop {
                terminates.push(self.literal()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBrace => break,
                    _ => return Err(self.unexpected("`,` or `}`")),
                }
            }
            self.bump();
        }
        if *self.peek() != Tok::Eol {
            return Err(self.unexpected("`terminates` or end of line"));
        }
        Ok(Rule {
            id,
            body,
            head,
            terminates,
        })
    }

    fn body_item(&mut self) -> Result<BodyItem, ParseError> {
        if *self.peek() == Tok::LBracket {
            Ok(BodyItem::Deontic(self.deontic()?))
        } else {
            Ok(BodyItem::Literal(self.literal()?))
        }
    }

    fn head(&mut self) -> Result<Head, ParseError> {
        if *self.peek() != Tok::LBracket {
            return Ok(Head::Definitional(self.literal()?));
        }
        let col = self.col();
        let mut links = vec![self.deontic()?];
        while *self.peek() == Tok::Otimes {
            self.bump();
            links.push(self.deontic()?);
        }
        ReparationChain::new(links)
            .map(Head::Deontic)
            .map_err(|e| self.error_at(col, ParseErrorKind::Chain(e)))
    }

    fn deontic(&mut self) -> Result<DeonticLiteral, ParseError> {
        self.expect(Tok::LBracket)?;
        let (tag, col) = self.word("a modality")?;
        self.expect(Tok::RBracket)?;
        let content = self.literal()?;
        if tag == "F" {
            return Ok(DeonticLiteral::new(Modality::Om, content.complement()));
        }
        match Modality::from_tag(&tag) {
            Some(m) => Ok(DeonticLiteral::new(m, content)),
            None => Err(self.error_at(col, ParseErrorKind::UnknownModality(tag))),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = *self.peek() == Tok::Tilde;
        if negated {
            self.bump();
        }
        let (atom, col) = self.word("a literal")?;
        if !is_identifier(&atom) {
            return Err(self.error_at(col, ParseErrorKind::BadAtom(atom)));
        }
        Ok(Literal::new(atom, !negated))
    }
}

/// Parses a rule file. Errors carry the 1-based line and column of the
/// offending token; rule-set level errors point at the statement that
/// introduced the problem.
pub fn parse_rules(text: &str) -> Result<RuleSet, ParseError> {
    let mut rules = Vec::new();
    let mut rule_pos = Vec::new();
    let mut sups = Vec::new();
    let mut sup_pos = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = lex_line(line, lineno)?;
        if toks.len() == 1 {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line: lineno,
        };
        match p.statement()? {
            Statement::Rule(r, col) => {
                rules.push(r);
                rule_pos.push((lineno, col));
            }
            Statement::Superiority(w, l, col) => {
                sups.push((w, l));
                sup_pos.push((lineno, col));
            }
        }
    }
    let locate = |e: &RuleSetError| -> (usize, usize) {
        match e {
            RuleSetError::DuplicateId(id) => rules
                .iter()
                .enumerate()
                .filter(|(_, r)| &r.id == id)
                .nth(1)
                .map(|(i, _)| rule_pos[i])
                .unwrap_or((1, 1)),
            RuleSetError::UnknownRule(w, l, _) => sups
                .iter()
                .position(|(a, b)| a == w && b == l)
                .map(|i| sup_pos[i])
                .unwrap_or((1, 1)),
            RuleSetError::SelfSuperiority(id) => sups
                .iter()
                .position(|(a, b)| a == id && b == id)
                .map(|i| sup_pos[i])
                .unwrap_or((1, 1)),
            RuleSetError::Cycle(id) => sups
                .iter()
                .rposition(|(a, b)| a == id || b == id)
                .map(|i| sup_pos[i])
                .unwrap_or((1, 1)),
        }
    };
    RuleSet::new(rules.clone(), sups.iter().cloned()).map_err(|e| {
        let (line, column) = locate(&e);
        ParseError {
            line,
            column,
            kind: ParseErrorKind::RuleSet(e),
        }
    })
}
