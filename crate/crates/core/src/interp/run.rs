use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::step::{step, Rule, StepResult, StuckReason};
use super::Configuration;
use crate::ast::{Program, Value};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub max_steps: u64,
    pub trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_steps: DEFAULT_MAX_STEPS, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Terminal(Value),
    /// No rule applied to the configuration reached after `step` steps.
    Stuck {
        reason: StuckReason,
        step: u64,
    },
    Budget,
}

impl RunOutcome {
    /// `Terminal`, `Stuck:<kind>` or `Budget`.
    pub fn label(&self) -> String {
        match self {
            RunOutcome::Terminal(_) => "Terminal".into(),
            RunOutcome::Stuck { reason, .. } => format!("Stuck:{}", reason.kind()),
            RunOutcome::Budget => "Budget".into(),
        }
    }
}

/// One taken step: the rule chain, the head of the expression before the
/// step, the heap size after it and a digest of the resulting configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: u64,
    pub rules: Vec<Rule>,
    pub head: &'static str,
    pub heap: usize,
    pub digest: String,
}

impl TraceEntry {
    pub fn line(&self) -> String {
        let chain: Vec<&str> = self.rules.iter().map(|r| r.name()).collect();
        format!("step {}: {} | {} | heap={}", self.step, chain.join(">"), self.head, self.heap)
    }
}

pub fn digest(cfg: &Configuration) -> String {
    let hash = Sha256::digest(cfg.to_string().as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps: u64,
    pub trace: Vec<TraceEntry>,
    /// How often each rule occurred in a taken step, contexts included.
    pub rule_counts: BTreeMap<Rule, u64>,
    pub final_config: Configuration,
}

/// Runs from `cfg` until it is terminal, stuck, or the budget runs out.
pub fn run(program: &Program, mut cfg: Configuration, opts: &RunOptions) -> RunResult {
    let mut steps = 0;
    let mut trace = Vec::new();
    let mut rule_counts = BTreeMap::new();
    let outcome = loop {
        let head = redex_head(&cfg);
        if steps >= opts.max_steps {
            if let Some(v) = terminal_value(&cfg) {
                break RunOutcome::Terminal(v);
            }
            break RunOutcome::Budget;
        }
        match step(program, &mut cfg) {
            StepResult::Terminal(v) => break RunOutcome::Terminal(v),
            StepResult::Stuck(reason) => break RunOutcome::Stuck { reason, step: steps },
            StepResult::Stepped(rules) => {
                steps += 1;
                for r in &rules {
                    *rule_counts.entry(*r).or_insert(0) += 1;
                }
                if opts.trace {
                    trace.push(TraceEntry { step: steps, rules, head, heap: cfg.heap.len(), digest: digest(&cfg) });
                }
            }
        }
    };
    RunResult { outcome, steps, trace, rule_counts, final_config: cfg }
}

fn terminal_value(cfg: &Configuration) -> Option<Value> {
    match cfg.expr.as_value() {
        Some(v) if cfg.stack.len() == 1 => Some(v.clone()),
        _ => None,
    }
}

fn redex_head(cfg: &Configuration) -> &'static str {
    cfg.expr.head()
}
