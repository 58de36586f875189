//! Pipelines behind the command line: check, run, verify and corpus
//! regression against `.expect` sidecars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{Program, Value};
use crate::diagnostic::{Code, Diagnostic, Span};
use crate::interp::{
    initial_configuration, linearity_violations, run, step, well_formed_configuration, Configuration, Rule, RunOptions,
    RunOutcome, StepResult, DEFAULT_MAX_STEPS,
};
use crate::monitor::check_error;
use crate::parser::parse_program;
use crate::typeck::{type_program, ConfigTyping};

pub const MAX_STEPS_ENV: &str = "MUNGO_MAX_STEPS";

/// Stack reserved for worker threads. Loop unrolling can nest expressions
/// once per step, and every pass over an expression recurses on its depth.
pub const WORKER_STACK: usize = 1 << 30;

/// Runs `f` on a thread with a `WORKER_STACK`-sized stack.
pub fn with_large_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(WORKER_STACK)
            .spawn_scoped(s, f)
            .expect("spawn worker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// The step budget: `MUNGO_MAX_STEPS` when set to a positive number, else
/// the default.
pub fn default_max_steps() -> u64 {
    std::env::var(MAX_STEPS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_MAX_STEPS)
}

pub fn read_source(path: &Path) -> Result<String, Diagnostic> {
    fs::read_to_string(path).map_err(|e| {
        Diagnostic::error(
            Code::Io,
            Span { file: path.display().to_string(), ..Span::default() },
            format!("cannot read `{}`: {e}", path.display()),
        )
    })
}

/// Result of the static pipeline.
#[derive(Debug, Clone)]
pub enum CheckReport {
    Accepted(Program),
    Rejected(Program, Vec<Diagnostic>),
    ParseFailed(Vec<Diagnostic>),
}

impl CheckReport {
    pub fn exit_code(&self) -> i32 {
        match self {
            CheckReport::Accepted(_) => 0,
            CheckReport::Rejected(..) => 1,
            CheckReport::ParseFailed(_) => 2,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            CheckReport::Accepted(_) => &[],
            CheckReport::Rejected(_, d) | CheckReport::ParseFailed(d) => d,
        }
    }
}

pub fn check_source(file: &str, text: &str) -> CheckReport {
    match parse_program(file, text) {
        Err(diags) => CheckReport::ParseFailed(diags),
        Ok(program) => {
            let report = type_program(&program);
            if report.accepted() {
                CheckReport::Accepted(program)
            } else {
                CheckReport::Rejected(program, report.diagnostics)
            }
        }
    }
}

pub fn check_file(path: &Path) -> CheckReport {
    match read_source(path) {
        Ok(text) => check_source(&path.display().to_string(), &text),
        Err(d) => CheckReport::ParseFailed(vec![d]),
    }
}

/// Heap objects whose usage has not reached `end`.
pub fn unfinished_objects(cfg: &Configuration) -> Vec<String> {
    cfg.heap
        .objects
        .iter()
        .filter(|(_, o)| !o.usage.is_end())
        .map(|(id, o)| format!("{id}: {}[{}]", o.class, o.usage))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_steps: u64,
    pub wtc_every_step: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_steps: DEFAULT_MAX_STEPS, wtc_every_step: false }
    }
}

/// A per-step assertion that failed while running an accepted program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessViolation {
    pub step: u64,
    pub what: String,
}

impl fmt::Display for SoundnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "soundness violation at step {}: {}", self.step, self.what)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub outcome: RunOutcome,
    pub steps: u64,
    pub rule_counts: BTreeMap<Rule, u64>,
    pub monitor_hits: usize,
    pub wf_violations: usize,
    pub linearity_violations: usize,
    pub wtc_violations: usize,
    pub violations: Vec<SoundnessViolation>,
    pub final_config: Configuration,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && matches!(self.outcome, RunOutcome::Terminal(_))
    }
}

/// Runs an accepted program, asserting at every configuration that no
/// runtime error applies, that the configuration is well formed, that linear
/// objects are referenced once and, optionally, that it is well typed. At the
/// end every object must have completed its protocol.
pub fn verify_program(program: &Program, opts: &VerifyOptions) -> VerifyReport {
    let typing = ConfigTyping::new(program);
    let mut cfg = initial_configuration(program).expect("an accepted program has a valid Main");
    let mut report = VerifyReport {
        outcome: RunOutcome::Budget,
        steps: 0,
        rule_counts: BTreeMap::new(),
        monitor_hits: 0,
        wf_violations: 0,
        linearity_violations: 0,
        wtc_violations: 0,
        violations: Vec::new(),
        final_config: cfg.clone(),
    };
    let outcome = loop {
        let n = report.steps;
        let mut found = Vec::new();
        let mut fail = |what: String| found.push(SoundnessViolation { step: n, what });
        if let Some(err) = check_error(&cfg) {
            report.monitor_hits += 1;
            fail(err.report(n));
        }
        let wf = well_formed_configuration(program, &cfg);
        report.wf_violations += wf.len();
        for v in wf {
            fail(format!("ill-formed configuration: {v}"));
        }
        let lin = linearity_violations(&cfg);
        report.linearity_violations += lin.len();
        for (o, count) in lin {
            fail(format!("linear object {o} is referenced {count} times"));
        }
        if opts.wtc_every_step {
            if let Err(vs) = typing.check(&cfg) {
                report.wtc_violations += vs.len();
                for v in vs {
                    fail(format!("configuration is not well typed: {v}"));
                }
            }
        }
        report.violations.append(&mut found);
        if !report.violations.is_empty() {
            break RunOutcome::Stuck {
                reason: crate::interp::StuckReason::IllFormed("verification failed".into()),
                step: n,
            };
        }
        if report.steps >= opts.max_steps {
            break RunOutcome::Budget;
        }
        let mut fail = |what: String| report.violations.push(SoundnessViolation { step: n, what });
        match step(program, &mut cfg) {
            StepResult::Terminal(v) => {
                let open = unfinished_objects(&cfg);
                if !open.is_empty() {
                    fail(format!("protocols left incomplete: {}", open.join(", ")));
                }
                break RunOutcome::Terminal(v);
            }
            StepResult::Stuck(reason) => {
                fail(format!("stuck: {reason}"));
                break RunOutcome::Stuck { reason, step: n };
            }
            StepResult::Stepped(rules) => {
                report.steps += 1;
                for r in rules {
                    *report.rule_counts.entry(r).or_insert(0) += 1;
                }
            }
        }
    };
    report.outcome = outcome;
    report.final_config = cfg;
    report
}

/// What a corpus case is expected to do.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Accept,
    Reject(BTreeSet<Code>),
    Run(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpectationError {
    #[error("missing expectation file `{0}`")]
    Missing(PathBuf),
    #[error("malformed expectation `{0}`")]
    Malformed(String),
    #[error("unknown diagnostic code `{0}`")]
    UnknownCode(String),
}

impl Expectation {
    pub fn parse(text: &str) -> Result<Self, ExpectationError> {
        let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
        let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match word {
            "accept" if rest.is_empty() => Ok(Expectation::Accept),
            "reject" if !rest.is_empty() => rest
                .split(',')
                .map(|c| Code::parse(c.trim()).ok_or_else(|| ExpectationError::UnknownCode(c.trim().to_string())))
                .collect::<Result<_, _>>()
                .map(Expectation::Reject),
            "run" if rest == "Terminal" || rest == "Budget" || rest.starts_with("Stuck:") => {
                Ok(Expectation::Run(rest.to_string()))
            }
            _ => Err(ExpectationError::Malformed(line.to_string())),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Accept => write!(f, "accept"),
            Expectation::Reject(codes) => {
                let names: Vec<&str> = codes.iter().map(|c| c.as_str()).collect();
                write!(f, "reject {}", names.join(","))
            }
            Expectation::Run(o) => write!(f, "run {o}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub path: PathBuf,
    pub expected: Option<Expectation>,
    pub actual: String,
    pub passed: bool,
}

fn observe(path: &Path, expected: &Expectation, max_steps: u64) -> (String, bool) {
    let report = check_file(path);
    let codes = || -> BTreeSet<Code> { report.diagnostics().iter().map(|d| d.code).collect() };
    let show = |codes: &BTreeSet<Code>| codes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",");
    match expected {
        Expectation::Accept => match &report {
            CheckReport::Accepted(p) => {
                let v = verify_program(p, &VerifyOptions { max_steps, wtc_every_step: true });
                if v.ok() {
                    ("accept".into(), true)
                } else {
                    let first = v.violations.first().map(|v| v.to_string()).unwrap_or_else(|| v.outcome.label());
                    (format!("accept, verify failed: {first}"), false)
                }
            }
            _ => (format!("reject {}", show(&codes())), false),
        },
        Expectation::Reject(want) => match &report {
            CheckReport::Accepted(_) => ("accept".into(), false),
            _ => {
                let got = codes();
                (format!("reject {}", show(&got)), got == *want)
            }
        },
        Expectation::Run(want) => {
            let program = match &report {
                CheckReport::Accepted(p) | CheckReport::Rejected(p, _) => p,
                CheckReport::ParseFailed(_) => return (format!("parse failed: {}", show(&codes())), false),
            };
            match initial_configuration(program) {
                Ok(cfg) => {
                    let r = run(program, cfg, &RunOptions { max_steps, trace: false });
                    let got = r.outcome.label();
                    (format!("run {got}"), got == *want)
                }
                Err(e) => (format!("cannot start: {e}"), false),
            }
        }
    }
}

pub fn run_case(path: &Path, max_steps: u64) -> CaseResult {
    let sidecar = path.with_extension("expect");
    let expected = match fs::read_to_string(&sidecar) {
        Ok(text) => Expectation::parse(&text).map_err(|e| e.to_string()),
        Err(_) => Err(ExpectationError::Missing(sidecar).to_string()),
    };
    match expected {
        Ok(exp) => {
            let (actual, passed) = observe(path, &exp, max_steps);
            CaseResult { path: path.to_path_buf(), expected: Some(exp), actual, passed }
        }
        Err(why) => CaseResult { path: path.to_path_buf(), expected: None, actual: why, passed: false },
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorpusSummary {
    pub cases: Vec<CaseResult>,
}

impl CorpusSummary {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.cases.len()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let name = c.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let expected = c.expected.as_ref().map(|e| e.to_string()).unwrap_or_else(|| "-".into());
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {name:<32} expected: {expected:<36} got: {}\n", c.actual));
        }
        let n = self.cases.len();
        out.push_str(&format!("{}/{n} passed ({n} cases)\n", self.passed()));
        out
    }
}

/// The `.mungo` files of a directory, sorted by name.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mungo"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every case, in parallel, reporting in file-name order.
pub fn run_corpus(dir: &Path, max_steps: u64) -> std::io::Result<CorpusSummary> {
    let files = corpus_files(dir)?;
    let cases = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| {
                std::thread::Builder::new()
                    .stack_size(WORKER_STACK)
                    .spawn_scoped(s, move || run_case(f, max_steps))
                    .expect("spawn corpus worker")
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("corpus case panicked")).collect()
    });
    Ok(CorpusSummary { cases })
}

/// One line describing a finished run.
pub fn describe_outcome(outcome: &RunOutcome, cfg: &Configuration) -> String {
    match outcome {
        RunOutcome::Terminal(v) => {
            let open = unfinished_objects(cfg);
            let protocols = if open.is_empty() {
                "all protocols completed".to_string()
            } else {
                format!("incomplete protocols: {}", open.join(", "))
            };
            let value = if *v == Value::Unit { String::new() } else { format!(" {v}") };
            format!("Terminal{value}, {protocols}")
        }
        RunOutcome::Stuck { reason, step } => format!("Stuck({reason}) after {step} steps"),
        RunOutcome::Budget => "Budget exhausted".into(),
    }
}
