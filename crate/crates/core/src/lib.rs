//! Compliance-by-design checking for annotated business process models.
//!
//! A process model (tasks, XOR/AND gateways, literal annotations on tasks) is
//! unfolded into its finite set of traces. Each trace is folded into a
//! sequence of environment states, a defeasible deontic rule base decides
//! which obligations are in force at each position, and every obligation
//! instance is tracked through its lifecycle (fulfilled, violated,
//! compensated, terminated). Per-trace results roll up into full/partial and
//! strong/weak compliance verdicts with diagnoses.
//!
//! Module map:
//!
//! - [`model`]: literals, process graphs, JSON model files, validation, trace enumeration
//! - [`state`]: cumulated environment states along a trace
//! - [`fcl`]: rule language AST, parser, serializer, statistics
//! - [`reasoner`]: defeasible inference with superiority
//! - [`lifecycle`]: obligation instances and their status machine
//! - [`compliance`]: process verdicts, diagnoses, event-log replay
//! - [`synth`]: deterministic generator for benchmark-shaped models and rule bases

#![forbid(unsafe_code)]

pub mod compliance;
pub mod config;
pub mod fcl;
pub mod lifecycle;
pub mod model;
pub mod reasoner;
pub mod state;
pub mod synth;

pub use compliance::{
    check_process, replay_log, ComplianceReport, Diagnosis, FailureKind, Verdicts,
};
pub use config::{Config, ForceMode};
pub use fcl::{parse_rules, serialize_rules, Modality, RuleSet};
pub use lifecycle::{evaluate_trace, ObligationInstance, Status, TraceResult};
pub use model::{enumerate_traces, parse_model, validate_graph, Literal, ProcessGraph, Trace};
pub use state::{cumulate, StateSequence};
