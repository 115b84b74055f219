//! Trace enumeration over the block tree.

use std::collections::HashSet;

use thiserror::Error;

use super::validate::{decompose, Block, ValidationReport};
use super::{ProcessGraph, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("model is not a valid block-structured process:\n{0}")]
    Invalid(ValidationReport),
    #[error("model has more than {cap} traces")]
    Overflow { cap: usize },
}

type Seq = Vec<usize>;

struct Expander {
    loop_bound: usize,
    cap: usize,
}

impl Expander {
    fn check(&self, set: &HashSet<Seq>) -> Result<(), TraceError> {
        if set.len() > self.cap {
            Err(TraceError::Overflow { cap: self.cap })
        } else {
            Ok(())
        }
    }

    fn insert(&self, set: &mut HashSet<Seq>, s: Seq) -> Result<(), TraceError> {
        set.insert(s);
        self.check(set)
    }

    fn expand(&self, block: &Block) -> Result<HashSet<Seq>, TraceError> {
        match block {
            Block::Task(t) => Ok(HashSet::from([vec![*t]])),
            Block::Seq(items) => {
                let mut acc = HashSet::from([Vec::new()]);
                for item in items {
                    let part = self.expand(item)?;
                    acc = self.concat(&acc, &part)?;
                }
                Ok(acc)
            }
            Block::Xor(branches) => {
                let mut acc = HashSet::new();
                for b in branches {
                    for s in self.expand(b)? {
                        self.insert(&mut acc, s)?;
                    }
                }
                Ok(acc)
            }
            Block::And(branches) => {
                let parts = branches
                    .iter()
                    .map(|b| {
                        self.expand(b)
                            .map(|set| set.into_iter().collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut acc = HashSet::new();
                let mut choice = vec![0usize; parts.len()];
                if parts.iter().any(Vec::is_empty) {
                    return Ok(acc);
                }
                loop {
                    let picked: Vec<&[usize]> = choice
                        .iter()
                        .zip(&parts)
                        .map(|(&c, p)| p[c].as_slice())
                        .collect();
                    self.shuffles(&picked, &mut acc)?;
                    // odometer over branch choices
                    let mut i = 0;
                    loop {
                        if i == choice.len() {
                            return Ok(acc);
                        }
                        choice[i] += 1;
                        if choice[i] < parts[i].len() {
                            break;
                        }
                        choice[i] = 0;
                        i += 1;
                    }
                }
            }
            Block::Loop { body, redo } => {
                let body = self.expand(body)?;
                let redo = self.expand(redo)?;
                let mut acc = body.clone();
                self.check(&acc)?;
                let mut cur = body.clone();
                for _ in 0..self.loop_bound {
                    let again = self.concat(&cur, &redo)?;
                    cur = self.concat(&again, &body)?;
                    for s in &cur {
                        self.insert(&mut acc, s.clone())?;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn concat(
        &self,
        left: &HashSet<Seq>,
        right: &HashSet<Seq>,
    ) -> Result<HashSet<Seq>, TraceError> {
        let mut out = HashSet::with_capacity(left.len().saturating_mul(right.len()).min(self.cap));
        for a in left {
            for b in right {
                let mut s = Vec::with_capacity(a.len() + b.len());
                s.extend_from_slice(a);
                s.extend_from_slice(b);
                self.insert(&mut out, s)?;
            }
        }
        Ok(out)
    }

    /// All interleavings of `seqs` that keep each sequence's internal order.
    fn shuffles(&self, seqs: &[&[usize]], out: &mut HashSet<Seq>) -> Result<(), TraceError> {
        let total: usize = seqs.iter().map(|s| s.len()).sum();
        let mut pos = vec![0usize; seqs.len()];
        let mut cur = Vec::with_capacity(total);
        self.shuffle_rec(seqs, &mut pos, &mut cur, total, out)
    }

    fn shuffle_rec(
        &self,
        seqs: &[&[usize]],
        pos: &mut [usize],
        cur: &mut Seq,
        total: usize,
        out: &mut HashSet<Seq>,
    ) -> Result<(), TraceError> {
        if cur.len() == total {
            return self.insert(out, cur.clone());
        }
        for i in 0..seqs.len() {
            if pos[i] < seqs[i].len() {
                cur.push(seqs[i][pos[i]]);
                pos[i] += 1;
                self.shuffle_rec(seqs, pos, cur, total, out)?;
                pos[i] -= 1;
                cur.pop();
            }
        }
        Ok(())
    }
}

/// Every task sequence the control flow admits, with each loop's back edge
/// taken at most `loop_bound` times, sorted lexicographically by task ids.
///
/// Fails rather than truncating when more than `trace_cap` distinct traces
/// exist.
pub fn enumerate_traces(
    g: &ProcessGraph,
    loop_bound: usize,
    trace_cap: usize,
) -> Result<Vec<Trace>, TraceError> {
    let block = decompose(g).map_err(TraceError::Invalid)?;
    let expander = Expander {
        loop_bound,
        cap: trace_cap,
    };
    let set = expander.expand(&block)?;
    let mut traces: Vec<Trace> = set
        .into_iter()
        .map(|s| Trace {
            steps: s.into_iter().map(|i| g.nodes()[i].id.clone()).collect(),
        })
        .collect();
    traces.sort();
    Ok(traces)
}
