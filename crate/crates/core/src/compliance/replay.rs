//! Event logs: one executed event per line, replayed as a single trace.
//!
//! ```text
//! # event ; annotations
//! open     ; restaurant
//! serve    ; sell_alcohol, ~sober
//! close
//! ```

use std::collections::BTreeSet;

use thiserror::Error;

use crate::config::Config;
use crate::fcl::RuleSet;
use crate::lifecycle::{evaluate_annotated, TraceResult};
use crate::model::{first_conflict, is_node_id, Literal, Trace};
use crate::reasoner::Reasoner;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEvent {
    pub id: String,
    pub annotations: BTreeSet<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct LogError {
    pub line: usize,
    pub column: usize,
    pub kind: LogErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogErrorKind {
    #[error("missing event id")]
    MissingEventId,
    #[error("`{0}` is not a valid event id")]
    BadEventId(String),
    #[error("empty annotation")]
    EmptyAnnotation,
    #[error("`{0}` is not a valid literal")]
    BadLiteral(String),
    #[error("annotations `{0}` and `{1}` contradict each other")]
    Inconsistent(Literal, Literal),
}

/// 1-based char column of byte offset `at` in `line`.
fn column(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

/// Start offset of the trimmed part of `s` inside `line`, where `s` begins
/// at byte `base`.
fn trimmed(s: &str, base: usize) -> (&str, usize) {
    let lead = s.len() - s.trim_start().len();
    (s.trim(), base + lead)
}

pub fn parse_log(text: &str) -> Result<Vec<LogEvent>, LogError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(h) => &raw[..h],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let err = |at: usize, kind| LogError {
            line: line_no,
            column: column(raw, at),
            kind,
        };
        let (id_part, rest) = match line.find(';') {
            Some(p) => (&line[..p], Some((&line[p + 1..], p + 1))),
            None => (line, None),
        };
        let (id, id_at) = trimmed(id_part, 0);
        if id.is_empty() {
            return Err(err(id_at, LogErrorKind::MissingEventId));
        }
        if !is_node_id(id) {
            return Err(err(id_at, LogErrorKind::BadEventId(id.to_string())));
        }
        let mut annotations = BTreeSet::new();
        if let Some((list, base)) = rest {
            if !list.trim().is_empty() {
                let mut offset = base;
                for item in list.split(',') {
                    let (lit, at) = trimmed(item, offset);
                    offset += item.len() + 1;
                    if lit.is_empty() {
                        return Err(err(at, LogErrorKind::EmptyAnnotation));
                    }
                    let l: Literal = lit
                        .parse()
                        .map_err(|_| err(at, LogErrorKind::BadLiteral(lit.to_string())))?;
                    if let Some(c) = annotations
                        .iter()
                        .find(|a: &&Literal| a.is_complement_of(&l))
                    {
                        return Err(err(at, LogErrorKind::Inconsistent(c.clone(), l)));
                    }
                    annotations.insert(l);
                }
            }
        }
        debug_assert!(first_conflict(&annotations).is_none());
        events.push(LogEvent {
            id: id.to_string(),
            annotations,
        });
    }
    Ok(events)
}

/// Treats every event as an executed task and evaluates the induced trace.
pub fn replay_log(events: &[LogEvent], rs: &RuleSet, cfg: &Config) -> TraceResult {
    let reasoner = Reasoner::new(rs);
    let trace = Trace::new(events.iter().map(|e| e.id.clone()));
    evaluate_annotated(&reasoner, trace, events.iter().map(|e| &e.annotations), cfg)
}
