//! The JSON model file format.
//!
//! ```json
//! {
//!   "name": "orders",
//!   "nodes": [
//!     {"id": "s", "type": "start"},
//!     {"id": "A", "type": "task", "name": "Receive", "annotations": ["p", "~q"]},
//!     {"id": "e", "type": "end"}
//!   ],
//!   "edges": [{"from": "s", "to": "A"}, {"from": "A", "to": "e"}]
//! }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{assemble, ModelError, Node, NodeKind, ProcessGraph, SemanticError};
use crate::model::Literal;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    nodes: Vec<RawNode>,
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    #[serde(rename = "type")]
    kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotations: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
}

/// Parses a JSON model. Syntax errors carry line/column, semantic errors a
/// JSON path. Control-flow shape is left to [`super::validate_graph`].
pub fn parse_model(text: &str) -> Result<ProcessGraph, ModelError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        // serde_json reports column 0 for errors at a line start
        line: e.line().max(1),
        column: e.column().max(1),
        message: strip_position(&e.to_string()),
    })?;

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (i, n) in raw.nodes.into_iter().enumerate() {
        let mut annotations = BTreeSet::new();
        for (j, s) in n.annotations.unwrap_or_default().iter().enumerate() {
            let lit: Literal = s.parse().map_err(|e| ModelError::Semantic {
                location: format!("nodes[{i}].annotations[{j}]"),
                kind: SemanticError::InvalidLiteral(e),
            })?;
            annotations.insert(lit);
        }
        nodes.push(Node {
            id: n.id,
            kind: n.kind,
            name: n.name,
            annotations,
        });
    }
    let edges = raw.edges.into_iter().map(|e| (e.from, e.to)).collect();
    assemble(raw.name, nodes, edges)
}

/// serde_json appends " at line X column Y"; we report those separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

impl ProcessGraph {
    /// Pretty-printed JSON in the model file format. Node and edge order is
    /// preserved, so output is stable for a given graph.
    pub fn to_json(&self) -> String {
        let raw = RawModel {
            name: self.name.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| RawNode {
                    id: n.id.clone(),
                    kind: n.kind,
                    name: n.name.clone(),
                    annotations: (n.kind == NodeKind::Task && !n.annotations.is_empty())
                        .then(|| n.annotations.iter().map(ToString::to_string).collect()),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| RawEdge {
                    from: self.nodes[a].id.clone(),
                    to: self.nodes[b].id.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("model serializes");
        out.push('\n');
        out
    }
}
