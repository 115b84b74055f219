//! Obligation instances and their lifecycle along one trace.
//!
//! At every position the tracker updates the state, asks the reasoner which
//! obligation chains are in force, opens instances for chains that have just
//! entered force, checks every open instance against the state, and applies
//! the `terminates` clauses of the rules that fired. Closing the trace
//! settles whatever is still open and then decides compensation backwards
//! along each chain.
//!
//! Statuses only move `ACTIVE → {FULFILLED, VIOLATED, TERMINATED}` and
//! `VIOLATED → COMPENSATED`.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::config::{Config, ForceMode};
use crate::fcl::{DeonticLiteral, Head, Modality, ReparationChain, RuleSet};
use crate::model::{Literal, ProcessGraph, Trace};
use crate::reasoner::Reasoner;
use crate::state::{update, UnknownTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Active,
    Fulfilled,
    Violated,
    Compensated,
    Terminated,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            Status::Fulfilled | Status::Compensated | Status::Terminated
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObligationInstance {
    pub content: Literal,
    pub modality: Modality,
    pub source_rule: String,
    #[serde(skip)]
    pub rule_index: usize,
    pub chain: ReparationChain,
    /// 1-based link of `chain` this instance stands for.
    pub chain_index: usize,
    pub start: usize,
    /// Last position in force; `None` while still in force.
    pub end: Option<usize>,
    pub status: Status,
    pub violation_positions: BTreeSet<usize>,
    /// A perdurant obligation met after it had been violated.
    pub fulfilled_at: Option<usize>,
    /// Instance (index in the trace result) whose violation activated this one.
    pub predecessor: Option<usize>,
    /// Instance activated by this one's violation.
    pub successor: Option<usize>,
}

impl ObligationInstance {
    /// The link that compensates this one, if the chain continues.
    pub fn compensation(&self) -> Option<&DeonticLiteral> {
        self.chain.compensation(self.chain_index)
    }

    pub fn is_compensable(&self) -> bool {
        self.compensation().is_some()
    }

    pub fn is_violated(&self) -> bool {
        !self.violation_positions.is_empty()
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.violation_positions.iter().next().copied()
    }

    pub fn deontic(&self) -> DeonticLiteral {
        DeonticLiteral::new(self.modality, self.content.clone())
    }
}

/// Something that happened to an instance (index into the instance list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum LifecycleEvent {
    Activated {
        instance: usize,
        position: usize,
    },
    Fulfilled {
        instance: usize,
        position: usize,
    },
    Violated {
        instance: usize,
        position: usize,
    },
    Terminated {
        instance: usize,
        position: usize,
    },
    /// Left force without a status change.
    Expired {
        instance: usize,
        position: usize,
    },
    Compensated {
        instance: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceResult {
    pub trace: Trace,
    pub instances: Vec<ObligationInstance>,
    pub strongly_compliant: bool,
    pub weakly_compliant: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Close {
    /// A `terminates` clause fired.
    Terminate,
    /// The interval ended: trace end, or the rule stopped deriving it.
    End,
}

/// Incremental lifecycle evaluation, one trace position per [`Tracker::step`].
#[derive(Debug, Clone)]
pub struct Tracker<'r, 'a> {
    reasoner: &'r Reasoner<'a>,
    strict: bool,
    mode: ForceMode,
    instances: Vec<ObligationInstance>,
    in_force: Vec<usize>,
    state: BTreeSet<Literal>,
    seen: HashSet<Literal>,
    prev_derived: HashSet<usize>,
    permissions: BTreeSet<DeonticLiteral>,
    position: usize,
}

impl<'r, 'a> Tracker<'r, 'a> {
    pub fn new(reasoner: &'r Reasoner<'a>, cfg: &Config) -> Self {
        Tracker {
            reasoner,
            strict: cfg.strict_compensation,
            mode: cfg.force_mode,
            instances: Vec::new(),
            in_force: Vec::new(),
            state: BTreeSet::new(),
            seen: HashSet::new(),
            prev_derived: HashSet::new(),
            permissions: BTreeSet::new(),
            position: 0,
        }
    }

    /// Positions consumed so far.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn state(&self) -> &BTreeSet<Literal> {
        &self.state
    }

    pub fn instances(&self) -> &[ObligationInstance] {
        &self.instances
    }

    /// Indices of the instances currently in force.
    pub fn in_force(&self) -> &[usize] {
        &self.in_force
    }

    /// Deontic literals visible to rule premises at the next position.
    pub fn ambient(&self) -> BTreeSet<DeonticLiteral> {
        let mut out = self.permissions.clone();
        out.extend(self.in_force.iter().map(|&i| self.instances[i].deontic()));
        out
    }

    /// Executes one task (or replays one event) with the given annotations.
    pub fn step(&mut self, annotations: &BTreeSet<Literal>) -> Vec<LifecycleEvent> {
        let mut ev = Vec::new();
        self.position += 1;
        let k = self.position;
        self.state = update(&self.state, annotations);
        self.seen.extend(self.state.iter().cloned());

        let ambient = self.ambient();
        let (fired, _) = self.reasoner.fire(&self.state, &ambient);
        let rules = self.reasoner.rule_set().rules();

        let mut derived = HashSet::new();
        let mut granted = BTreeSet::new();
        let mut terminated: HashSet<&Literal> = HashSet::new();
        for &r in &fired {
            if let Head::Deontic(chain) = &rules[r].head {
                if chain.first().modality.is_permission() {
                    granted.insert(chain.first().clone());
                } else {
                    derived.insert(r);
                }
            }
            terminated.extend(rules[r].terminates.iter());
        }

        match self.mode {
            ForceMode::Persist => {
                self.permissions
                    .retain(|p| !terminated.contains(&p.content));
                self.permissions.extend(granted);
            }
            ForceMode::Reapply => {
                self.permissions = granted;
                let lapsed: Vec<usize> = self
                    .in_force
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let inst = &self.instances[i];
                        inst.chain_index == 1 && !derived.contains(&inst.rule_index)
                    })
                    .collect();
                for i in lapsed {
                    self.close(i, k - 1, k, Close::End, &mut ev);
                }
                self.prune();
            }
        }

        for &r in &fired {
            if !derived.contains(&r) || self.prev_derived.contains(&r) {
                continue;
            }
            let open = self.in_force.iter().any(|&i| {
                let inst = &self.instances[i];
                inst.rule_index == r && inst.chain_index == 1
            });
            if open {
                continue;
            }
            let Head::Deontic(chain) = &rules[r].head else {
                unreachable!()
            };
            self.activate(r, &rules[r].id, chain.clone(), 1, None, k, &mut ev);
        }

        let work = self.in_force.clone();
        self.run(work, k, &mut ev);

        let snapshot = self.in_force.clone();
        let mut spawned = Vec::new();
        for i in snapshot {
            if terminated.contains(&self.instances[i].content) {
                spawned.extend(self.close(i, k, k, Close::Terminate, &mut ev));
            }
        }
        self.run(spawned, k, &mut ev);

        self.prev_derived = derived;
        ev
    }

    /// Closes everything still in force at the last position and settles
    /// compensation.
    pub fn finish(mut self) -> (Vec<ObligationInstance>, Vec<LifecycleEvent>) {
        let mut ev = Vec::new();
        let len = self.position;
        while !self.in_force.is_empty() {
            let open = std::mem::take(&mut self.in_force);
            let mut spawned = Vec::new();
            for i in open {
                if self.instances[i].end.is_none() {
                    spawned.extend(self.close(i, len, len, Close::End, &mut ev));
                }
            }
            self.run(spawned, len, &mut ev);
        }
        for i in (0..self.instances.len()).rev() {
            let inst = &self.instances[i];
            if inst.status != Status::Violated {
                continue;
            }
            let Some(s) = inst.successor else { continue };
            let ok = match self.instances[s].status {
                Status::Fulfilled | Status::Terminated => true,
                Status::Compensated => !self.strict,
                Status::Active | Status::Violated => false,
            };
            if ok {
                self.instances[i].status = Status::Compensated;
                ev.push(LifecycleEvent::Compensated { instance: i });
            }
        }
        (self.instances, ev)
    }

    #[allow(clippy::too_many_arguments)]
    fn activate(
        &mut self,
        rule_index: usize,
        rule_id: &str,
        chain: ReparationChain,
        chain_index: usize,
        predecessor: Option<usize>,
        k: usize,
        ev: &mut Vec<LifecycleEvent>,
    ) -> usize {
        let link = chain.links()[chain_index - 1].clone();
        let i = self.instances.len();
        let early = link.modality.is_preemptive() && self.seen.contains(&link.content);
        self.instances.push(ObligationInstance {
            content: link.content,
            modality: link.modality,
            source_rule: rule_id.to_string(),
            rule_index,
            chain,
            chain_index,
            start: k,
            end: None,
            status: Status::Active,
            violation_positions: BTreeSet::new(),
            fulfilled_at: None,
            predecessor,
            successor: None,
        });
        ev.push(LifecycleEvent::Activated {
            instance: i,
            position: k,
        });
        if early {
            self.instances[i].status = Status::Fulfilled;
            self.instances[i].end = Some(k);
            ev.push(LifecycleEvent::Fulfilled {
                instance: i,
                position: k,
            });
        } else {
            self.in_force.push(i);
        }
        i
    }

    /// Marks a violation at `k`; the first one activates the compensation.
    fn violate(
        &mut self,
        i: usize,
        k: usize,
        spawn_at: usize,
        ev: &mut Vec<LifecycleEvent>,
    ) -> Option<usize> {
        let first = self.instances[i].status == Status::Active;
        self.instances[i].violation_positions.insert(k);
        if !first {
            return None;
        }
        self.instances[i].status = Status::Violated;
        ev.push(LifecycleEvent::Violated {
            instance: i,
            position: k,
        });
        let inst = &self.instances[i];
        if !inst.is_compensable() {
            return None;
        }
        let (r, id, chain, next) = (
            inst.rule_index,
            inst.source_rule.clone(),
            inst.chain.clone(),
            inst.chain_index + 1,
        );
        let s = self.activate(r, &id, chain, next, Some(i), spawn_at, ev);
        self.instances[i].successor = Some(s);
        Some(s)
    }

    fn fulfil(&mut self, i: usize, k: usize, ev: &mut Vec<LifecycleEvent>) {
        let inst = &mut self.instances[i];
        inst.end = Some(k);
        match inst.status {
            Status::Active => {
                inst.status = Status::Fulfilled;
                ev.push(LifecycleEvent::Fulfilled {
                    instance: i,
                    position: k,
                });
            }
            _ => {
                inst.fulfilled_at = Some(k);
                ev.push(LifecycleEvent::Expired {
                    instance: i,
                    position: k,
                });
            }
        }
    }

    /// Checks one in-force instance against the current state.
    fn evaluate(&mut self, i: usize, k: usize, ev: &mut Vec<LifecycleEvent>) -> Option<usize> {
        let inst = &self.instances[i];
        if inst.end.is_some() {
            return None;
        }
        let holds = self.state.contains(&inst.content);
        match inst.modality {
            Modality::Opu => {
                if holds {
                    self.fulfil(i, k, ev);
                    None
                } else {
                    self.instances[i].end = Some(k);
                    self.violate(i, k, k, ev)
                }
            }
            Modality::Om => {
                if holds {
                    None
                } else {
                    self.violate(i, k, k, ev)
                }
            }
            Modality::P => None,
            _ => {
                if holds {
                    self.fulfil(i, k, ev);
                }
                None
            }
        }
    }

    /// Evaluates `work` and every compensation it activates.
    fn run(&mut self, mut work: Vec<usize>, k: usize, ev: &mut Vec<LifecycleEvent>) {
        let mut next = 0;
        while next < work.len() {
            let i = work[next];
            next += 1;
            if let Some(s) = self.evaluate(i, k, ev) {
                work.push(s);
            }
        }
        self.prune();
    }

    /// Takes an instance out of force at `pos`; any compensation it triggers
    /// starts at `spawn_at`.
    fn close(
        &mut self,
        i: usize,
        pos: usize,
        spawn_at: usize,
        how: Close,
        ev: &mut Vec<LifecycleEvent>,
    ) -> Option<usize> {
        let inst = &self.instances[i];
        let (modality, status) = (inst.modality, inst.status);
        let mut spawned = None;
        match (modality, status) {
            (Modality::Om, Status::Active) if how == Close::Terminate => {
                self.instances[i].status = Status::Terminated;
                ev.push(LifecycleEvent::Terminated {
                    instance: i,
                    position: pos,
                });
            }
            (Modality::Om, Status::Active) => {
                self.instances[i].status = Status::Fulfilled;
                ev.push(LifecycleEvent::Fulfilled {
                    instance: i,
                    position: pos,
                });
            }
            (m, Status::Active) if m.is_perdurant() && how == Close::Terminate => {
                // deadline passed: the violation stands, the obligation stays
                return self.violate(i, pos, spawn_at, ev);
            }
            (m, Status::Active) if m.is_achievement() || m == Modality::Opu => {
                spawned = self.violate(i, pos, spawn_at, ev);
            }
            _ => {
                ev.push(LifecycleEvent::Expired {
                    instance: i,
                    position: pos,
                });
            }
        }
        self.instances[i].end = Some(pos);
        spawned
    }

    fn prune(&mut self) {
        let instances = &self.instances;
        self.in_force.retain(|&i| instances[i].end.is_none());
    }
}

/// Runs the lifecycle over a sequence of annotation sets, one per position.
pub fn evaluate_annotated<'s>(
    reasoner: &Reasoner<'_>,
    trace: Trace,
    annotations: impl IntoIterator<Item = &'s BTreeSet<Literal>>,
    cfg: &Config,
) -> TraceResult {
    let mut tracker = Tracker::new(reasoner, cfg);
    for a in annotations {
        tracker.step(a);
    }
    let (instances, _) = tracker.finish();
    summarize(trace, instances)
}

pub(crate) fn summarize(trace: Trace, instances: Vec<ObligationInstance>) -> TraceResult {
    let strongly = instances
        .iter()
        .all(|o| !matches!(o.status, Status::Violated | Status::Compensated));
    let weakly = instances
        .iter()
        .all(|o| !o.is_violated() || o.status == Status::Compensated);
    TraceResult {
        trace,
        instances,
        strongly_compliant: strongly,
        weakly_compliant: weakly,
    }
}

pub(crate) fn annotations_of<'g>(
    g: &'g ProcessGraph,
    t: &Trace,
) -> Result<Vec<&'g BTreeSet<Literal>>, UnknownTask> {
    t.steps
        .iter()
        .enumerate()
        .map(|(i, id)| {
            g.task(id)
                .map(|n| &n.annotations)
                .ok_or_else(|| UnknownTask {
                    position: i + 1,
                    id: id.clone(),
                })
        })
        .collect()
}

/// Tracks every obligation instance along `t`.
pub fn evaluate_trace(
    rs: &RuleSet,
    g: &ProcessGraph,
    t: &Trace,
    cfg: &Config,
) -> Result<TraceResult, UnknownTask> {
    let annotations = annotations_of(g, t)?;
    let reasoner = Reasoner::new(rs);
    Ok(evaluate_annotated(&reasoner, t.clone(), annotations, cfg))
}
