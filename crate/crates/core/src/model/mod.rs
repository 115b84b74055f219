//! Annotated process models.
//!
//! A model is a directed graph of tasks and gateways between a single start
//! and a single end node. Tasks carry a consistent set of [`Literal`]
//! annotations describing their effect on the environment. Only
//! block-structured graphs are accepted: every split is closed by a join of
//! the same kind, and loops are XOR blocks with one back edge.

mod json;
mod traces;
pub(crate) mod validate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use json::parse_model;
pub use traces::{enumerate_traces, TraceError};
pub use validate::{validate_graph, Block, ValidationReport, Violation};

/// Returns true for `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Node ids are a little looser than literal atoms: digits may lead and
/// `.`/`-` are allowed after the first character.
pub fn is_node_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// A propositional literal: an atom with a polarity. Written `p` or `~p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    atom: String,
    positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid literal `{0}`: expected an optional `~` followed by [A-Za-z_][A-Za-z0-9_]*")]
pub struct LiteralError(pub String);

impl Literal {
    /// Panics if `atom` is not an identifier; use [`Literal::from_str`] for
    /// untrusted input.
    pub fn new(atom: impl Into<String>, positive: bool) -> Self {
        let atom = atom.into();
        assert!(is_identifier(&atom), "invalid atom `{atom}`");
        Literal { atom, positive }
    }

    pub fn pos(atom: impl Into<String>) -> Self {
        Literal::new(atom, true)
    }

    pub fn neg(atom: impl Into<String>) -> Self {
        Literal::new(atom, false)
    }

    pub fn atom(&self) -> &str {
        &self.atom
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn complement(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.atom == other.atom && self.positive != other.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        f.write_str(&self.atom)
    }
}

impl FromStr for Literal {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (atom, positive) = match s.strip_prefix('~') {
            Some(rest) => (rest, false),
            None => (s, true),
        };
        if !is_identifier(atom) {
            return Err(LiteralError(s.to_string()));
        }
        Ok(Literal {
            atom: atom.to_string(),
            positive,
        })
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of literals is consistent iff it holds no complementary pair.
pub fn is_consistent<'a>(literals: impl IntoIterator<Item = &'a Literal>) -> bool {
    first_conflict(literals).is_none()
}

/// The first complementary pair found, if any.
pub fn first_conflict<'a>(
    literals: impl IntoIterator<Item = &'a Literal>,
) -> Option<(Literal, Literal)> {
    let mut seen: HashMap<&str, &Literal> = HashMap::new();
    for lit in literals {
        if let Some(prev) = seen.get(lit.atom()) {
            if prev.positive != lit.positive {
                return Some(((*prev).clone(), lit.clone()));
            }
        } else {
            seen.insert(lit.atom(), lit);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Start,
    End,
    Task,
    AndSplit,
    AndJoin,
    XorSplit,
    XorJoin,
}

impl NodeKind {
    pub fn is_split(self) -> bool {
        matches!(self, NodeKind::AndSplit | NodeKind::XorSplit)
    }

    pub fn is_join(self) -> bool {
        matches!(self, NodeKind::AndJoin | NodeKind::XorJoin)
    }

    pub fn is_gateway(self) -> bool {
        self.is_split() || self.is_join()
    }

    /// The join that must close a split of this kind.
    pub fn matching_join(self) -> Option<NodeKind> {
        match self {
            NodeKind::AndSplit => Some(NodeKind::AndJoin),
            NodeKind::XorSplit => Some(NodeKind::XorJoin),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::End => "end",
            NodeKind::Task => "task",
            NodeKind::AndSplit => "and_split",
            NodeKind::AndJoin => "and_join",
            NodeKind::XorSplit => "xor_split",
            NodeKind::XorJoin => "xor_join",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub name: Option<String>,
    /// Always empty for anything but tasks.
    pub annotations: BTreeSet<Literal>,
}

/// What went wrong while reading or assembling a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {kind}")]
    Semantic {
        /// JSON path of the offending element, e.g. `edges[3].to`.
        location: String,
        kind: SemanticError,
    },
}

impl ModelError {
    /// Human-readable position of the error; never empty.
    pub fn location(&self) -> String {
        match self {
            ModelError::Syntax { line, column, .. } => format!("{line}:{column}"),
            ModelError::Semantic { location, .. } => location.clone(),
        }
    }

    fn semantic(location: impl Into<String>, kind: SemanticError) -> Self {
        ModelError::Semantic {
            location: location.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("invalid node id `{0}`")]
    InvalidId(String),
    #[error("edge endpoint `{0}` does not name a node")]
    DanglingEdge(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("inconsistent annotations on `{node}`: both {a} and {b}")]
    InconsistentAnnotations {
        node: String,
        a: Literal,
        b: Literal,
    },
    #[error(transparent)]
    InvalidLiteral(#[from] LiteralError),
    #[error("only tasks may carry annotations, `{0}` is a gateway or terminal")]
    AnnotatedGateway(String),
}

/// A validated-on-construction process graph. Construction checks ids,
/// edges and annotations; the control-flow invariants (single start/end,
/// reachability, block structure) are reported by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessGraph {
    name: String,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl ProcessGraph {
    pub fn builder(name: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            name: name.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// The task named `id`, if it exists and is a task.
    pub fn task(&self, id: &str) -> Option<&Node> {
        self.node(id).filter(|n| n.kind == NodeKind::Task)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Task)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].id.as_str(), self.nodes[b].id.as_str()))
    }

    pub(crate) fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub(crate) fn predecessors(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    /// Nodes of the given kind, in declaration order.
    pub(crate) fn of_kind(&self, kind: NodeKind) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].kind == kind)
    }
}

/// Incremental construction of a [`ProcessGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
}

impl GraphBuilder {
    pub fn node(mut self, id: impl Into<String>, kind: NodeKind) -> Self {
        self.nodes.push(Node {
            id: id.into(),
            kind,
            name: None,
            annotations: BTreeSet::new(),
        });
        self
    }

    pub fn start(self, id: impl Into<String>) -> Self {
        self.node(id, NodeKind::Start)
    }

    pub fn end(self, id: impl Into<String>) -> Self {
        self.node(id, NodeKind::End)
    }

    pub fn task<I, L>(mut self, id: impl Into<String>, annotations: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<Literal>,
    {
        self.nodes.push(Node {
            id: id.into(),
            kind: NodeKind::Task,
            name: None,
            annotations: annotations.into_iter().map(Into::into).collect(),
        });
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.edges.push((from.into(), to.into()));
        self
    }

    /// Adds `a -> b -> c -> ...` edges.
    pub fn path<S: AsRef<str>>(mut self, ids: &[S]) -> Self {
        for pair in ids.windows(2) {
            self.edges
                .push((pair[0].as_ref().to_string(), pair[1].as_ref().to_string()));
        }
        self
    }

    pub fn build(self) -> Result<ProcessGraph, ModelError> {
        assemble(self.name, self.nodes, self.edges)
    }
}

impl From<&str> for Literal {
    /// Panics on malformed input; intended for literals in source code.
    fn from(s: &str) -> Self {
        s.parse().unwrap_or_else(|e| panic!("{e}"))
    }
}

fn assemble(
    name: String,
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
) -> Result<ProcessGraph, ModelError> {
    let mut index = HashMap::with_capacity(nodes.len());
    for (i, node) in nodes.iter().enumerate() {
        let loc = format!("nodes[{i}]");
        if !is_node_id(&node.id) {
            return Err(ModelError::semantic(
                format!("{loc}.id"),
                SemanticError::InvalidId(node.id.clone()),
            ));
        }
        if index.insert(node.id.clone(), i).is_some() {
            return Err(ModelError::semantic(
                format!("{loc}.id"),
                SemanticError::DuplicateId(node.id.clone()),
            ));
        }
        if node.kind != NodeKind::Task && !node.annotations.is_empty() {
            return Err(ModelError::semantic(
                format!("{loc}.annotations"),
                SemanticError::AnnotatedGateway(node.id.clone()),
            ));
        }
        if let Some((a, b)) = first_conflict(&node.annotations) {
            return Err(ModelError::semantic(
                format!("{loc}.annotations"),
                SemanticError::InconsistentAnnotations {
                    node: node.id.clone(),
                    a,
                    b,
                },
            ));
        }
    }

    let mut seen = BTreeSet::new();
    let mut resolved = Vec::with_capacity(edges.len());
    let mut succ = vec![Vec::new(); nodes.len()];
    let mut pred = vec![Vec::new(); nodes.len()];
    for (i, (from, to)) in edges.iter().enumerate() {
        let a = *index.get(from).ok_or_else(|| {
            ModelError::semantic(
                format!("edges[{i}].from"),
                SemanticError::DanglingEdge(from.clone()),
            )
        })?;
        let b = *index.get(to).ok_or_else(|| {
            ModelError::semantic(
                format!("edges[{i}].to"),
                SemanticError::DanglingEdge(to.clone()),
            )
        })?;
        if !seen.insert((a, b)) {
            return Err(ModelError::semantic(
                format!("edges[{i}]"),
                SemanticError::DuplicateEdge(from.clone(), to.clone()),
            ));
        }
        resolved.push((a, b));
        succ[a].push(b);
        pred[b].push(a);
    }

    Ok(ProcessGraph {
        name,
        nodes,
        index,
        edges: resolved,
        succ,
        pred,
    })
}

/// A process trace: the ids of the tasks executed, in order. Position `k`
/// (1-based) is `steps[k - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    pub steps: Vec<String>,
}

impl Trace {
    pub fn new<S: Into<String>>(steps: impl IntoIterator<Item = S>) -> Self {
        Trace {
            steps: steps.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The task at 1-based position `k`.
    pub fn at(&self, k: usize) -> Option<&str> {
        k.checked_sub(1)
            .and_then(|i| self.steps.get(i))
            .map(String::as_str)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.steps.join(","))
    }
}
