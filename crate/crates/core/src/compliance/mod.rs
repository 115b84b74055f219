//! Process-level verdicts, diagnoses, and event-log replay.

mod replay;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::fcl::{Modality, RuleSet};
use crate::lifecycle::{annotations_of, evaluate_annotated, Status, TraceResult};
use crate::model::{enumerate_traces, ProcessGraph, TraceError};
use crate::reasoner::Reasoner;

pub use replay::{parse_log, replay_log, LogError, LogErrorKind, LogEvent};

/// The 2×2 matrix {all traces, some trace} × {strong, weak}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub fully_strong: bool,
    pub fully_weak: bool,
    pub partially_strong: bool,
    pub partially_weak: bool,
}

impl Verdicts {
    /// Folds per-trace `(strong, weak)` flags. Panics on an empty input:
    /// every valid model has at least one trace.
    pub fn from_flags(flags: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut v = Verdicts {
            fully_strong: true,
            fully_weak: true,
            partially_strong: false,
            partially_weak: false,
        };
        let mut n = 0;
        for (strong, weak) in flags {
            n += 1;
            v.fully_strong &= strong;
            v.fully_weak &= weak;
            v.partially_strong |= strong;
            v.partially_weak |= weak;
        }
        assert!(n > 0, "verdicts need at least one trace");
        v
    }

    /// The implications that must hold between the four cells.
    pub fn is_consistent(&self) -> bool {
        let implies = |a: bool, b: bool| !a || b;
        implies(self.fully_strong, self.fully_weak)
            && implies(self.fully_strong, self.partially_strong)
            && implies(self.fully_strong, self.partially_weak)
            && implies(self.fully_weak, self.partially_weak)
            && implies(self.partially_strong, self.partially_weak)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    PunctualViolation,
    AchievementViolation,
    MaintenanceViolation,
    PerdurantViolation,
    /// A violation whose compensation failed as well.
    Uncompensated,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::PunctualViolation => "punctual-violation",
            FailureKind::AchievementViolation => "achievement-violation",
            FailureKind::MaintenanceViolation => "maintenance-violation",
            FailureKind::PerdurantViolation => "perdurant-violation",
            FailureKind::Uncompensated => "uncompensated",
        }
    }

    fn of(m: Modality) -> FailureKind {
        match m {
            Modality::Opu => FailureKind::PunctualViolation,
            Modality::Om => FailureKind::MaintenanceViolation,
            m if m.is_perdurant() => FailureKind::PerdurantViolation,
            _ => FailureKind::AchievementViolation,
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnosis {
    pub trace: Vec<String>,
    /// 1-based trace position of the earliest failure.
    pub position: usize,
    pub task: String,
    pub rule: String,
    pub obligation: String,
    pub kind: FailureKind,
}

/// Earliest failure of every violated instance of a trace, plus one
/// `uncompensated` entry per violation whose compensation also failed.
pub fn diagnose(result: &TraceResult) -> Vec<Diagnosis> {
    let steps = &result.trace.steps;
    let make = |position: usize, rule: &str, obligation: String, kind| Diagnosis {
        trace: steps.clone(),
        position,
        task: steps
            .get(position.wrapping_sub(1))
            .cloned()
            .unwrap_or_default(),
        rule: rule.to_string(),
        obligation,
        kind,
    };
    let mut out = Vec::new();
    for o in &result.instances {
        let Some(first) = o.first_violation() else {
            continue;
        };
        out.push(make(
            first,
            &o.source_rule,
            o.content.to_string(),
            FailureKind::of(o.modality),
        ));
        if o.status == Status::Violated {
            if let Some(s) = o.successor {
                let at = result.instances[s].first_violation().unwrap_or(first);
                out.push(make(
                    at,
                    &o.source_rule,
                    o.content.to_string(),
                    FailureKind::Uncompensated,
                ));
            }
        }
    }
    out
}

/// Per-trace summary kept alongside the verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceDigest {
    pub trace: Vec<String>,
    pub strongly_compliant: bool,
    pub weakly_compliant: bool,
    pub obligations: usize,
    pub violations: usize,
}

impl From<&TraceResult> for TraceDigest {
    fn from(r: &TraceResult) -> Self {
        TraceDigest {
            trace: r.trace.steps.clone(),
            strongly_compliant: r.strongly_compliant,
            weakly_compliant: r.weakly_compliant,
            obligations: r.instances.len(),
            violations: r.instances.iter().filter(|o| o.is_violated()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplianceReport {
    pub model: String,
    pub ruleset: String,
    pub traces: usize,
    pub verdicts: Verdicts,
    pub diagnoses: Vec<Diagnosis>,
    #[serde(skip)]
    pub results: Vec<TraceDigest>,
}

impl ComplianceReport {
    /// Assembles a report; the order of `results` does not matter.
    pub fn from_results(model: &str, ruleset: &str, results: &[TraceResult]) -> Self {
        let verdicts = Verdicts::from_flags(
            results
                .iter()
                .map(|r| (r.strongly_compliant, r.weakly_compliant)),
        );
        let mut diagnoses: Vec<Diagnosis> = results.iter().flat_map(diagnose).collect();
        diagnoses.sort_by(|a, b| {
            (&a.trace, a.position, &a.rule, a.kind, &a.obligation).cmp(&(
                &b.trace,
                b.position,
                &b.rule,
                b.kind,
                &b.obligation,
            ))
        });
        diagnoses.dedup();
        let mut digests: Vec<TraceDigest> = results.iter().map(TraceDigest::from).collect();
        digests.sort_by(|a, b| a.trace.cmp(&b.trace));
        ComplianceReport {
            model: model.to_string(),
            ruleset: ruleset.to_string(),
            traces: results.len(),
            verdicts,
            diagnoses,
            results: digests,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for ComplianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "model:   {}", self.model)?;
        writeln!(f, "ruleset: {}", self.ruleset)?;
        writeln!(f, "traces:  {}", self.traces)?;
        let v = &self.verdicts;
        writeln!(f, "                strong  weak")?;
        writeln!(
            f,
            "  all traces    {:<7} {}",
            yn(v.fully_strong),
            yn(v.fully_weak)
        )?;
        writeln!(
            f,
            "  some trace    {:<7} {}",
            yn(v.partially_strong),
            yn(v.partially_weak)
        )?;
        if self.diagnoses.is_empty() {
            return Ok(());
        }
        writeln!(f, "diagnoses:")?;
        for d in &self.diagnoses {
            writeln!(
                f,
                "  <{}> @{} {}: rule {} obligation {} ({})",
                d.trace.join(","),
                d.position,
                d.task,
                d.rule,
                d.obligation,
                d.kind
            )?;
        }
        Ok(())
    }
}

/// Evaluates every trace of `g` against `rs`.
pub fn check_process(
    g: &ProcessGraph,
    rs: &RuleSet,
    cfg: &Config,
) -> Result<ComplianceReport, TraceError> {
    let traces = enumerate_traces(g, cfg.loop_bound, cfg.trace_cap)?;
    let reasoner = Reasoner::new(rs);
    let eval = |t: &crate::model::Trace| {
        let ann = annotations_of(g, t).expect("enumerated traces only hold tasks");
        evaluate_annotated(&reasoner, t.clone(), ann, cfg)
    };
    let results: Vec<TraceResult> = if cfg.jobs == 1 {
        traces.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| traces.par_iter().map(eval).collect())
    };
    Ok(ComplianceReport::from_results(g.name(), "", &results))
}
