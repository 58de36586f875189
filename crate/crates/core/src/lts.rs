//! Labelled transition system over usages.
//!
//! Method transitions follow the `Branch` rule after unfolding recursion
//! variables; label transitions follow `Sel` on choice usages. `end` and
//! `⊤_U` are absorbing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::ast::Name;
use crate::usage::{Usage, UsageBody, UsageError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transition {
    Call(Name),
    Label(Name),
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Call(m) => write!(f, "call:{m}"),
            Transition::Label(l) => write!(f, "label:{l}"),
        }
    }
}

/// Unfolds recursion variables until a branch, choice, `end` or `⊤_U`.
pub fn unfold(usage: &Usage) -> Result<&UsageBody, UsageError> {
    let mut body = usage.body();
    let mut seen = BTreeSet::new();
    while let UsageBody::Var(x) = body {
        if !seen.insert(x.as_str()) {
            return Err(UsageError::UnfoldCycle(x.clone()));
        }
        body = usage.equations().get(x).ok_or_else(|| UsageError::UnboundVariable(x.clone()))?;
    }
    Ok(body)
}

/// `U --m--> U'`.
pub fn step_method(usage: &Usage, method: &str) -> Result<Option<Usage>, UsageError> {
    match unfold(usage)? {
        UsageBody::Branch(entries) => Ok(entries.get(method).map(|w| usage.with_body(w.clone()))),
        _ => Ok(None),
    }
}

/// `U --l--> U'`.
pub fn step_label(usage: &Usage, label: &str) -> Result<Option<Usage>, UsageError> {
    match usage.body() {
        UsageBody::Choice(entries) => Ok(entries.get(label).map(|u| usage.with_body(u.clone()))),
        _ => Ok(None),
    }
}

pub fn offered_methods(usage: &Usage) -> Result<BTreeSet<Name>, UsageError> {
    match unfold(usage)? {
        UsageBody::Branch(entries) => Ok(entries.keys().cloned().collect()),
        _ => Ok(BTreeSet::new()),
    }
}

pub fn offered_labels(usage: &Usage) -> BTreeSet<Name> {
    match usage.body() {
        UsageBody::Choice(entries) => entries.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

/// All one-step successors of a usage.
pub fn successors(usage: &Usage) -> Result<Vec<(Transition, Usage)>, UsageError> {
    let mut out = Vec::new();
    for m in offered_methods(usage)? {
        if let Some(next) = step_method(usage, &m)? {
            out.push((Transition::Call(m), next));
        }
    }
    for l in offered_labels(usage) {
        if let Some(next) = step_label(usage, &l)? {
            out.push((Transition::Label(l), next));
        }
    }
    Ok(out)
}

/// The reflexive-transitive closure of `{usage}` under both step relations.
pub fn reachable_states(usage: &Usage) -> Result<BTreeSet<Usage>, UsageError> {
    Ok(Lts::explore(usage)?.states.into_iter().collect())
}

/// Explicit reachable transition graph of a usage.
#[derive(Debug, Clone)]
pub struct Lts {
    pub states: Vec<Usage>,
    pub edges: Vec<(usize, Transition, usize)>,
}

impl Lts {
    pub fn explore(initial: &Usage) -> Result<Self, UsageError> {
        let mut index: BTreeMap<Usage, usize> = BTreeMap::new();
        let mut states = vec![initial.clone()];
        let mut edges = Vec::new();
        index.insert(initial.clone(), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (t, next) in successors(&states[i].clone())? {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        let j = states.len();
                        index.insert(next.clone(), j);
                        states.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                edges.push((i, t, j));
            }
        }
        Ok(Lts { states, edges })
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{}\" {{\n", escape(name));
        for (i, s) in self.states.iter().enumerate() {
            let shape = if s.is_end() { "doublecircle" } else { "ellipse" };
            out.push_str(&format!("  s{i} [label=\"{}\", shape={shape}];\n", escape(&s.to_string())));
        }
        for (from, t, to) in &self.edges {
            out.push_str(&format!("  s{from} -> s{to} [label=\"{}\"];\n", escape(&t.to_string())));
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
