//! Environment states along a trace.
//!
//! Executing a task overwrites the complements of its annotations and then
//! adds the annotations themselves; the initial state is empty.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Literal, ProcessGraph, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace position {position} names `{id}`, which is not a task of the model")]
pub struct UnknownTask {
    pub position: usize,
    pub id: String,
}

/// One state per trace position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateSequence {
    states: Vec<BTreeSet<Literal>>,
}

static EMPTY: BTreeSet<Literal> = BTreeSet::new();

impl StateSequence {
    /// Folds the update rule over a sequence of annotation sets.
    pub fn from_annotations<'a, I>(steps: I) -> Self
    where
        I: IntoIterator<Item = &'a BTreeSet<Literal>>,
    {
        let mut states = Vec::new();
        let mut cur = BTreeSet::new();
        for annotations in steps {
            cur = update(&cur, annotations);
            states.push(cur.clone());
        }
        StateSequence { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The state after position `n` (1-based); empty when out of range.
    pub fn state_at(&self, n: usize) -> &BTreeSet<Literal> {
        n.checked_sub(1)
            .and_then(|i| self.states.get(i))
            .unwrap_or(&EMPTY)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BTreeSet<Literal>> {
        self.states.iter()
    }
}

/// `(previous − complements(incoming)) ∪ incoming`.
pub fn update(previous: &BTreeSet<Literal>, incoming: &BTreeSet<Literal>) -> BTreeSet<Literal> {
    let mut next: BTreeSet<Literal> = previous
        .iter()
        .filter(|l| !incoming.contains(&l.complement()))
        .cloned()
        .collect();
    next.extend(incoming.iter().cloned());
    next
}

/// The state sequence of `trace` in `graph`.
pub fn cumulate(trace: &Trace, graph: &ProcessGraph) -> Result<StateSequence, UnknownTask> {
    let annotations = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, id)| {
            graph
                .task(id)
                .map(|t| &t.annotations)
                .ok_or_else(|| UnknownTask {
                    position: i + 1,
                    id: id.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StateSequence::from_annotations(annotations))
}

/// Free-function form of [`StateSequence::state_at`].
pub fn state_at(seq: &StateSequence, n: usize) -> &BTreeSet<Literal> {
    seq.state_at(n)
}
