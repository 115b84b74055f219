//! `fclcheck`: check annotated process models against FCL rule files.
//!
//! Exit codes: 0 compliant (or success), 1 non-compliant, 2 unreadable,
//! unparsable or invalid input, 3 too many traces.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fclcheck::compliance::{parse_log, replay_log};
use fclcheck::config::{DEFAULT_LOOP_BOUND, DEFAULT_TRACE_CAP};
use fclcheck::fcl::{ruleset_stats, serialize_rules};
use fclcheck::lifecycle::TraceResult;
use fclcheck::model::{enumerate_traces, parse_model, validate_graph, TraceError};
use fclcheck::synth::{generate_bench, ModelShape, RuleShape};
use fclcheck::{check_process, parse_rules, Config, ForceMode, ProcessGraph, RuleSet};

// stdout writes that tolerate a closed pipe (`fclcheck traces m.json | head`)
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const EXIT_NONCOMPLIANT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_OVERFLOW: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fclcheck",
    version,
    about = "Compliance checking of process models against FCL rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for structural errors.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the traces of a model, one per line.
    Traces {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LOOP_BOUND)]
        loop_bound: usize,
        #[arg(long, default_value_t = DEFAULT_TRACE_CAP)]
        trace_cap: usize,
    },
    /// Check every trace of a model against a rule file.
    Check {
        model: PathBuf,
        rules: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Replay an event log against a rule file.
    Replay {
        log: PathBuf,
        rules: PathBuf,
        #[arg(long, value_enum, default_value_t = Accept::Strong)]
        accept: Accept,
        #[arg(long)]
        strict_compensation: bool,
        #[arg(long, value_enum, default_value_t = Mode::Persist)]
        force_mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Count rules, atoms and deontic literals of a rule file.
    Stats {
        rules: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate a benchmark model and rule file, then time a check.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CheckOpts {
    #[arg(long, default_value_t = DEFAULT_LOOP_BOUND)]
    loop_bound: usize,
    #[arg(long, value_enum, default_value_t = Accept::Strong)]
    accept: Accept,
    /// A compensation that is itself only compensated does not count.
    #[arg(long)]
    strict_compensation: bool,
    #[arg(long, default_value_t = DEFAULT_TRACE_CAP)]
    trace_cap: usize,
    #[arg(long, value_enum, default_value_t = Mode::Persist)]
    force_mode: Mode,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl CheckOpts {
    fn config(&self) -> Config {
        Config {
            loop_bound: self.loop_bound,
            trace_cap: self.trace_cap,
            strict_compensation: self.strict_compensation,
            force_mode: self.force_mode.into(),
            jobs: self.jobs,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Start from the case-study shape; other flags override it.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    xor: Option<usize>,
    #[arg(long)]
    ternary: Option<usize>,
    #[arg(long)]
    loops: Option<usize>,
    #[arg(long)]
    min_path: Option<usize>,
    #[arg(long)]
    max_path: Option<usize>,
    #[arg(long)]
    rules: Option<usize>,
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    superiority: Option<usize>,
    /// Directory for `model.json` and `rules.fcl`.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Only write the files.
    #[arg(long)]
    no_check: bool,
    #[arg(long, default_value_t = DEFAULT_LOOP_BOUND)]
    loop_bound: usize,
    #[arg(long, default_value_t = DEFAULT_TRACE_CAP)]
    trace_cap: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    CaseStudy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Accept {
    Strong,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Persist,
    Reapply,
}

impl From<Mode> for ForceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Persist => ForceMode::Persist,
            Mode::Reapply => ForceMode::Reapply,
        }
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        let code = match e {
            TraceError::Overflow { .. } => EXIT_OVERFLOW,
            TraceError::Invalid(_) => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ProcessGraph, Failure> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_rules(path: &Path) -> Result<RuleSet, Failure> {
    let text = read(path)?;
    parse_rules(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn validate(model: &Path, format: Format) -> Outcome {
    let g = load_model(model)?;
    let report = validate_graph(&g);
    match format {
        Format::Json => outln!(
            "{}",
            serde_json::to_string_pretty(&report.violations).expect("violations serialize")
        ),
        Format::Text if report.is_empty() => outln!("{}: ok", g.name()),
        Format::Text => out!("{report}"),
    }
    Ok(if report.is_empty() { 0 } else { EXIT_INPUT })
}

fn traces(model: &Path, loop_bound: usize, trace_cap: usize) -> Outcome {
    let g = load_model(model)?;
    let mut out = String::new();
    for t in enumerate_traces(&g, loop_bound, trace_cap)? {
        let _ = writeln!(out, "{t}");
    }
    out!("{out}");
    Ok(0)
}

fn check(model: &Path, rules: &Path, opts: &CheckOpts) -> Outcome {
    let g = load_model(model)?;
    let rs = load_rules(rules)?;
    let mut report = check_process(&g, &rs, &opts.config())?;
    report.ruleset = stem(rules);
    let text = match opts.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_string(),
    };
    match &opts.report {
        Some(path) => write_out(path, &text)?,
        None => out!("{text}"),
    }
    let ok = match opts.accept {
        Accept::Strong => report.verdicts.fully_strong,
        Accept::Weak => report.verdicts.fully_weak,
    };
    Ok(if ok { 0 } else { EXIT_NONCOMPLIANT })
}

fn render_trace_result(r: &TraceResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trace: {}", r.trace);
    let _ = writeln!(out, "strongly compliant: {}", r.strongly_compliant);
    let _ = writeln!(out, "weakly compliant: {}", r.weakly_compliant);
    for o in &r.instances {
        let end = o.end.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        let _ = write!(
            out,
            "  {} [{}] {} {}..{} {:?}",
            o.source_rule,
            o.chain_index,
            o.deontic(),
            o.start,
            end,
            o.status
        );
        if !o.violation_positions.is_empty() {
            let v: Vec<String> = o
                .violation_positions
                .iter()
                .map(ToString::to_string)
                .collect();
            let _ = write!(out, " violated at {}", v.join(","));
        }
        out.push('\n');
    }
    out
}

fn replay(
    log: &Path,
    rules: &Path,
    accept: Accept,
    strict: bool,
    mode: Mode,
    format: Format,
) -> Outcome {
    let events =
        parse_log(&read(log)?).map_err(|e| Failure::input(format!("{}: {e}", log.display())))?;
    let rs = load_rules(rules)?;
    let cfg = Config {
        strict_compensation: strict,
        force_mode: mode.into(),
        ..Config::default()
    };
    let result = replay_log(&events, &rs, &cfg);
    match format {
        Format::Json => outln!(
            "{}",
            serde_json::to_string_pretty(&result).expect("result serializes")
        ),
        Format::Text => out!("{}", render_trace_result(&result)),
    }
    let ok = match accept {
        Accept::Strong => result.strongly_compliant,
        Accept::Weak => result.weakly_compliant,
    };
    Ok(if ok { 0 } else { EXIT_NONCOMPLIANT })
}

fn stats(rules: &Path, format: Format) -> Outcome {
    let rs = load_rules(rules)?;
    let s = ruleset_stats(&rs);
    match format {
        Format::Json => outln!(
            "{}",
            serde_json::to_string_pretty(&s).expect("stats serialize")
        ),
        Format::Text => out!("{s}"),
    }
    Ok(0)
}

fn bench(a: &BenchArgs) -> Outcome {
    let (mut ms, mut rsh) = match a.profile {
        Some(Profile::CaseStudy) => (ModelShape::case_study(), RuleShape::case_study()),
        None => (
            ModelShape {
                tasks: 10,
                xor: 0,
                ternary: 0,
                loops: 0,
                min_path: None,
                max_path: None,
            },
            RuleShape {
                rules: 20,
                definitional: 4,
                atoms: 25,
                superiority: 1,
                punctual: 2,
                maintenance: 3,
                prohibitions: 1,
                permissions: 2,
                chains: 1,
                terminations: 2,
                deontic_premises: 1,
            },
        ),
    };
    let set = |field: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *field = v;
        }
    };
    set(&mut ms.tasks, a.tasks);
    set(&mut ms.xor, a.xor);
    set(&mut ms.ternary, a.ternary);
    set(&mut ms.loops, a.loops);
    if a.min_path.is_some() {
        ms.min_path = a.min_path;
    }
    if a.max_path.is_some() {
        ms.max_path = a.max_path;
    }
    set(&mut rsh.rules, a.rules);
    set(&mut rsh.atoms, a.atoms);
    set(&mut rsh.superiority, a.superiority);
    let (g, rs) = generate_bench(&ms, &rsh, a.seed).map_err(|e| Failure::input(e.to_string()))?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::input(format!("{}: {e}", a.out.display())))?;
    let model_path = a.out.join("model.json");
    let rules_path = a.out.join("rules.fcl");
    write_out(&model_path, &g.to_json())?;
    write_out(&rules_path, &serialize_rules(&rs))?;
    outln!("model: {}", model_path.display());
    outln!("rules: {}", rules_path.display());
    if a.no_check {
        return Ok(0);
    }
    let cfg = Config {
        loop_bound: a.loop_bound,
        trace_cap: a.trace_cap,
        jobs: a.jobs,
        ..Config::default()
    };
    let start = Instant::now();
    let report = check_process(&g, &rs, &cfg)?;
    let elapsed = start.elapsed();
    outln!("traces: {}", report.traces);
    outln!("diagnoses: {}", report.diagnoses.len());
    outln!("fully strong: {}", report.verdicts.fully_strong);
    outln!("elapsed: {:.3} s", elapsed.as_secs_f64());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Validate { model, format } => validate(model, *format),
        Command::Traces {
            model,
            loop_bound,
            trace_cap,
        } => traces(model, *loop_bound, *trace_cap),
        Command::Check { model, rules, opts } => check(model, rules, opts),
        Command::Replay {
            log,
            rules,
            accept,
            strict_compensation,
            force_mode,
            format,
        } => replay(
            log,
            rules,
            *accept,
            *strict_compensation,
            *force_mode,
            *format,
        ),
        Command::Stats { rules, format } => stats(rules, *format),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
