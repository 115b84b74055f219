use serde::{Deserialize, Serialize};

/// Default cap on the number of traces a model may unfold into.
pub const DEFAULT_TRACE_CAP: usize = 1_000_000;

/// Default number of times a loop's back edge may be taken.
pub const DEFAULT_LOOP_BOUND: usize = 2;

/// How an obligation leaves force once it has entered it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceMode {
    /// Once in force, an obligation stays in force until it is fulfilled,
    /// violated, terminated, or the trace ends.
    #[default]
    Persist,
    /// Additionally, an obligation leaves force as soon as the rule that
    /// created it no longer derives it.
    Reapply,
}

/// Knobs shared by trace enumeration, lifecycle tracking and process checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub loop_bound: usize,
    pub trace_cap: usize,
    /// Compensating a compensation does not amend the original violation.
    pub strict_compensation: bool,
    pub force_mode: ForceMode,
    /// Worker threads for trace evaluation; `0` lets the pool decide.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            loop_bound: DEFAULT_LOOP_BOUND,
            trace_cap: DEFAULT_TRACE_CAP,
            strict_compensation: false,
            force_mode: ForceMode::Persist,
            jobs: 1,
        }
    }
}
