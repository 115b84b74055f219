//! Structural validation and block decomposition.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::{NodeKind, ProcessGraph};

/// The block tree of a structured model. Leaves are task node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Task(usize),
    Seq(Vec<Block>),
    Xor(Vec<Block>),
    And(Vec<Block>),
    /// `body` runs once, then `redo; body` may repeat.
    Loop {
        body: Box<Block>,
        redo: Box<Block>,
    },
}

impl Block {
    /// Fewest tasks any execution of this block performs (loops taken once).
    pub fn min_tasks(&self) -> usize {
        match self {
            Block::Task(_) => 1,
            Block::Seq(bs) | Block::And(bs) => bs.iter().map(Block::min_tasks).sum(),
            Block::Xor(bs) => bs.iter().map(Block::min_tasks).min().unwrap_or(0),
            Block::Loop { body, .. } => body.min_tasks(),
        }
    }

    /// Most tasks an execution performs without taking any back edge.
    pub fn max_tasks_loop_free(&self) -> usize {
        match self {
            Block::Task(_) => 1,
            Block::Seq(bs) | Block::And(bs) => bs.iter().map(Block::max_tasks_loop_free).sum(),
            Block::Xor(bs) => bs.iter().map(Block::max_tasks_loop_free).max().unwrap_or(0),
            Block::Loop { body, .. } => body.max_tasks_loop_free(),
        }
    }
}

/// One broken invariant of a process graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StartCount {
        found: usize,
    },
    EndCount {
        found: usize,
    },
    Degree {
        node: String,
        node_kind: NodeKind,
        in_degree: usize,
        out_degree: usize,
        expected: &'static str,
    },
    /// The node is not on any start→end path.
    Unreachable {
        node: String,
    },
    /// A split is closed by a join of the other kind.
    BlockMismatch {
        split: String,
        join: String,
    },
    /// The control flow cannot be decomposed into properly nested blocks.
    Unstructured {
        node: String,
        detail: String,
    },
    /// Some execution performs no task at all.
    EmptyExecution,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StartCount { found } => {
                write!(f, "expected exactly one start node, found {found}")
            }
            Violation::EndCount { found } => {
                write!(f, "expected exactly one end node, found {found}")
            }
            Violation::Degree {
                node,
                node_kind,
                in_degree,
                out_degree,
                expected,
            } => write!(
                f,
                "{node_kind} `{node}` has in-degree {in_degree} and out-degree {out_degree}, expected {expected}"
            ),
            Violation::Unreachable { node } => {
                write!(f, "`{node}` does not lie on any start-to-end path")
            }
            Violation::BlockMismatch { split, join } => {
                write!(f, "split `{split}` is closed by join `{join}` of a different kind")
            }
            Violation::Unstructured { node, detail } => write!(f, "at `{node}`: {detail}"),
            Violation::EmptyExecution => f.write_str("some execution performs no task"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every process-graph invariant; the report is empty iff all hold.
pub fn validate_graph(g: &ProcessGraph) -> ValidationReport {
    match analyze(g) {
        Ok(_) => ValidationReport::default(),
        Err(violations) => ValidationReport { violations },
    }
}

/// Validates and decomposes in one go.
pub(crate) fn analyze(g: &ProcessGraph) -> Result<Block, Vec<Violation>> {
    let mut violations = Vec::new();

    let starts: Vec<usize> = g.of_kind(NodeKind::Start).collect();
    let ends: Vec<usize> = g.of_kind(NodeKind::End).collect();
    if starts.len() != 1 {
        violations.push(Violation::StartCount {
            found: starts.len(),
        });
    }
    if ends.len() != 1 {
        violations.push(Violation::EndCount { found: ends.len() });
    }

    for (i, node) in g.nodes().iter().enumerate() {
        let ins = g.predecessors(i).len();
        let outs = g.successors(i).len();
        let (ok, expected) = match node.kind {
            NodeKind::Start => (ins == 0 && outs == 1, "in 0, out 1"),
            NodeKind::End => (ins == 1 && outs == 0, "in 1, out 0"),
            NodeKind::Task => (ins == 1 && outs == 1, "in 1, out 1"),
            NodeKind::AndSplit | NodeKind::XorSplit => (ins == 1 && outs >= 2, "in 1, out >= 2"),
            NodeKind::AndJoin | NodeKind::XorJoin => (ins >= 2 && outs == 1, "in >= 2, out 1"),
        };
        if !ok {
            violations.push(Violation::Degree {
                node: node.id.clone(),
                node_kind: node.kind,
                in_degree: ins,
                out_degree: outs,
                expected,
            });
        }
    }

    if starts.len() == 1 && ends.len() == 1 {
        let fwd = reach(g, starts[0], true);
        let bwd = reach(g, ends[0], false);
        for (i, node) in g.nodes().iter().enumerate() {
            if !(fwd[i] && bwd[i]) {
                violations.push(Violation::Unreachable {
                    node: node.id.clone(),
                });
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    let block = Decomposer::new(g, starts[0]).run().map_err(|v| vec![v])?;
    if block.min_tasks() == 0 {
        return Err(vec![Violation::EmptyExecution]);
    }
    Ok(block)
}

fn reach(g: &ProcessGraph, from: usize, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.nodes().len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(n) = queue.pop_front() {
        let next = if forward {
            g.successors(n)
        } else {
            g.predecessors(n)
        };
        for &m in next {
            if !seen[m] {
                seen[m] = true;
                queue.push_back(m);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy)]
struct LoopInfo {
    split: usize,
    redo: usize,
    exit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Expect {
    End,
    Join,
    LoopSplit(usize),
    Back(usize),
}

struct Decomposer<'g> {
    g: &'g ProcessGraph,
    start: usize,
    /// Loop information keyed by header node.
    loops: Vec<Option<LoopInfo>>,
    consumed: Vec<bool>,
    depth: usize,
}

impl<'g> Decomposer<'g> {
    fn new(g: &'g ProcessGraph, start: usize) -> Self {
        let n = g.nodes().len();
        Decomposer {
            g,
            start,
            loops: vec![None; n],
            consumed: vec![false; n],
            depth: 0,
        }
    }

    fn id(&self, i: usize) -> String {
        self.g.nodes()[i].id.clone()
    }

    fn kind(&self, i: usize) -> NodeKind {
        self.g.nodes()[i].kind
    }

    fn unstructured(&self, i: usize, detail: impl Into<String>) -> Violation {
        Violation::Unstructured {
            node: self.id(i),
            detail: detail.into(),
        }
    }

    fn run(mut self) -> Result<Block, Violation> {
        self.find_loops()?;
        let first = self.g.successors(self.start)[0];
        self.consumed[self.start] = true;
        let (blocks, stop) = self.sequence(first, Expect::End)?;
        if self.kind(stop) != NodeKind::End {
            return Err(self.unstructured(stop, "join without a matching split"));
        }
        self.consumed[stop] = true;
        if let Some(i) = self.consumed.iter().position(|c| !c) {
            return Err(self.unstructured(i, "node is not part of any properly nested block"));
        }
        Ok(Block::Seq(blocks))
    }

    /// Finds back edges by DFS and checks that each closes a natural loop
    /// headed by an XOR join with a single XOR split exit.
    fn find_loops(&mut self) -> Result<(), Violation> {
        let n = self.g.nodes().len();
        let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
        let mut back_edges = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(self.start, 0)];
        state[self.start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let succ = self.g.successors(node);
            if *next < succ.len() {
                let m = succ[*next];
                *next += 1;
                match state[m] {
                    0 => {
                        state[m] = 1;
                        stack.push((m, 0));
                    }
                    1 => back_edges.push((node, m)),
                    _ => {}
                }
            } else {
                state[node] = 2;
                stack.pop();
            }
        }

        for &(tail, header) in &back_edges {
            if self.kind(header) != NodeKind::XorJoin {
                return Err(
                    self.unstructured(header, "cycle does not return to an xor_join loop header")
                );
            }
            if self.loops[header].is_some() || self.g.predecessors(header).len() != 2 {
                return Err(self.unstructured(
                    header,
                    "a loop header needs exactly one entry edge and one back edge",
                ));
            }
            // Natural loop: header plus everything reaching the tail without
            // passing through the header.
            let mut in_loop = vec![false; n];
            in_loop[header] = true;
            let mut queue = VecDeque::new();
            if !in_loop[tail] {
                in_loop[tail] = true;
                queue.push_back(tail);
            }
            while let Some(x) = queue.pop_front() {
                for &p in self.g.predecessors(x) {
                    if !in_loop[p] {
                        in_loop[p] = true;
                        queue.push_back(p);
                    }
                }
            }
            let exits: Vec<usize> = (0..n)
                .filter(|&x| in_loop[x] && self.g.successors(x).iter().any(|&s| !in_loop[s]))
                .collect();
            let [split] = exits[..] else {
                return Err(self.unstructured(header, "a loop must have exactly one exit"));
            };
            if self.kind(split) != NodeKind::XorSplit || self.g.successors(split).len() != 2 {
                return Err(Violation::BlockMismatch {
                    split: self.id(split),
                    join: self.id(header),
                });
            }
            let succ = self.g.successors(split);
            let (redo, exit) = if in_loop[succ[0]] {
                (succ[0], succ[1])
            } else {
                (succ[1], succ[0])
            };
            if !in_loop[redo] || in_loop[exit] {
                return Err(
                    self.unstructured(split, "loop split needs one redo and one exit branch")
                );
            }
            self.loops[header] = Some(LoopInfo { split, redo, exit });
        }
        Ok(())
    }

    fn consume(&mut self, i: usize) -> Result<(), Violation> {
        if std::mem::replace(&mut self.consumed[i], true) {
            return Err(self.unstructured(i, "node is entered by more than one block"));
        }
        Ok(())
    }

    /// Parses a sequence of blocks starting at `cur`, stopping at a join, the
    /// end node, or the loop split/back target named by `expect`.
    fn sequence(
        &mut self,
        mut cur: usize,
        expect: Expect,
    ) -> Result<(Vec<Block>, usize), Violation> {
        self.depth += 1;
        if self.depth > self.g.nodes().len() + 2 {
            return Err(self.unstructured(cur, "nesting exceeds graph size"));
        }
        let mut blocks = Vec::new();
        let result = loop {
            if expect == Expect::Back(cur) {
                break Ok((blocks, cur));
            }
            if let Expect::LoopSplit(h) = expect {
                if self.loops[h].map(|l| l.split) == Some(cur) {
                    break Ok((blocks, cur));
                }
            }
            match self.kind(cur) {
                NodeKind::End => break Ok((blocks, cur)),
                NodeKind::Start => break Err(self.unstructured(cur, "start node re-entered")),
                NodeKind::Task => {
                    self.consume(cur)?;
                    blocks.push(Block::Task(cur));
                    cur = self.g.successors(cur)[0];
                }
                NodeKind::XorJoin if self.loops[cur].is_some() => {
                    let info = self.loops[cur].expect("checked");
                    let header = cur;
                    self.consume(header)?;
                    let (body, stop) =
                        self.sequence(self.g.successors(header)[0], Expect::LoopSplit(header))?;
                    if stop != info.split {
                        break Err(
                            self.unstructured(header, "loop body does not reach its exit split")
                        );
                    }
                    self.consume(info.split)?;
                    let (redo, back) = self.sequence(info.redo, Expect::Back(header))?;
                    if back != header {
                        break Err(self.unstructured(
                            info.split,
                            "redo branch does not return to the loop header",
                        ));
                    }
                    blocks.push(Block::Loop {
                        body: Box::new(Block::Seq(body)),
                        redo: Box::new(Block::Seq(redo)),
                    });
                    cur = info.exit;
                }
                NodeKind::XorJoin | NodeKind::AndJoin => break Ok((blocks, cur)),
                kind @ (NodeKind::XorSplit | NodeKind::AndSplit) => {
                    self.consume(cur)?;
                    let split = cur;
                    let mut branches = Vec::new();
                    let mut join = None;
                    for &s in self.g.successors(split).to_vec().iter() {
                        let (b, stop) = self.sequence(s, Expect::Join)?;
                        if !self.kind(stop).is_join() || self.loops[stop].is_some() {
                            return Err(self.unstructured(split, "branch does not end at a join"));
                        }
                        match join {
                            None => join = Some(stop),
                            Some(j) if j != stop => {
                                return Err(self.unstructured(
                                    split,
                                    "branches reconverge at different joins",
                                ));
                            }
                            _ => {}
                        }
                        branches.push(Block::Seq(b));
                    }
                    let join = join.expect("split has at least two branches");
                    if kind.matching_join() != Some(self.kind(join)) {
                        break Err(Violation::BlockMismatch {
                            split: self.id(split),
                            join: self.id(join),
                        });
                    }
                    if self.g.predecessors(join).len() != branches.len() {
                        break Err(self.unstructured(
                            join,
                            "join has more incoming edges than its split has branches",
                        ));
                    }
                    self.consume(join)?;
                    blocks.push(if kind == NodeKind::XorSplit {
                        Block::Xor(branches)
                    } else {
                        Block::And(branches)
                    });
                    cur = self.g.successors(join)[0];
                }
            }
        };
        self.depth -= 1;
        result
    }
}

/// Decomposes a graph that is known to be valid.
pub(crate) fn decompose(g: &ProcessGraph) -> Result<Block, ValidationReport> {
    analyze(g).map_err(|violations| ValidationReport { violations })
}
