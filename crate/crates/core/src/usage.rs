//! Usage terms: the protocol attached to every class.
//!
//! A usage `u^E` pairs a body with a set of recursive equations. Usages are
//! kept in canonical form: equations are ordered by variable name and any
//! equation not reachable from the body is dropped, so structural equality is
//! usage equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ast::Name;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UsageBody {
    /// `{m_i; w_i}`: any `m_i` may be called, continuing as `w_i`.
    Branch(BTreeMap<Name, UsageBody>),
    /// `⟨l_i : u_i⟩`: continuation chosen by the label a method returned.
    Choice(BTreeMap<Name, UsageBody>),
    Var(Name),
    End,
    /// `⊤_U`: distinct from `end`, but offers no transitions.
    Top,
}

impl UsageBody {
    pub fn branch<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, UsageBody)>,
        S: Into<Name>,
    {
        UsageBody::Branch(entries.into_iter().map(|(m, w)| (m.into(), w)).collect())
    }

    pub fn choice<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, UsageBody)>,
        S: Into<Name>,
    {
        UsageBody::Choice(entries.into_iter().map(|(l, u)| (l.into(), u)).collect())
    }

    pub fn var(x: impl Into<Name>) -> Self {
        UsageBody::Var(x.into())
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            UsageBody::Branch(m) | UsageBody::Choice(m) => {
                for w in m.values() {
                    w.collect_vars(out);
                }
            }
            UsageBody::Var(x) => {
                out.insert(x.clone());
            }
            UsageBody::End | UsageBody::Top => {}
        }
    }

    /// Usage variables occurring in this body.
    pub fn variables(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Method names mentioned anywhere in the body.
    pub fn collect_methods(&self, out: &mut BTreeSet<Name>) {
        match self {
            UsageBody::Branch(m) => {
                for (name, w) in m {
                    out.insert(name.clone());
                    w.collect_methods(out);
                }
            }
            UsageBody::Choice(m) => {
                for w in m.values() {
                    w.collect_methods(out);
                }
            }
            _ => {}
        }
    }

    /// Labels mentioned anywhere in the body.
    pub fn collect_labels(&self, out: &mut BTreeSet<Name>) {
        match self {
            UsageBody::Branch(m) => {
                for w in m.values() {
                    w.collect_labels(out);
                }
            }
            UsageBody::Choice(m) => {
                for (l, u) in m {
                    out.insert(l.clone());
                    u.collect_labels(out);
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UsageError {
    #[error("usage variable `{0}` is not bound by any equation")]
    UnboundVariable(Name),
    #[error("usage variable `{0}` unfolds to itself without reaching a branch")]
    UnfoldCycle(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Usage {
    body: UsageBody,
    equations: BTreeMap<Name, UsageBody>,
}

impl Usage {
    /// Builds a usage in canonical form. No validation is performed.
    pub fn new(body: UsageBody, equations: BTreeMap<Name, UsageBody>) -> Self {
        let mut u = Usage { body, equations };
        u.prune();
        u
    }

    /// Builds a usage after checking that every variable is bound and every
    /// equation is productive.
    pub fn checked(body: UsageBody, equations: BTreeMap<Name, UsageBody>) -> Result<Self, UsageError> {
        let mut all = body.variables();
        for rhs in equations.values() {
            all.extend(rhs.variables());
        }
        if let Some(x) = all.iter().find(|x| !equations.contains_key(*x)) {
            return Err(UsageError::UnboundVariable(x.clone()));
        }
        for start in equations.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = start;
            while let Some(UsageBody::Var(next)) = equations.get(cur) {
                if !seen.insert(cur.clone()) {
                    return Err(UsageError::UnfoldCycle(start.clone()));
                }
                cur = next;
            }
        }
        Ok(Usage::new(body, equations))
    }

    pub fn simple(body: UsageBody) -> Self {
        Usage::new(body, BTreeMap::new())
    }

    pub fn end() -> Self {
        Usage::simple(UsageBody::End)
    }

    pub fn top() -> Self {
        Usage::simple(UsageBody::Top)
    }

    pub fn body(&self) -> &UsageBody {
        &self.body
    }

    pub fn equations(&self) -> &BTreeMap<Name, UsageBody> {
        &self.equations
    }

    /// Same equations, new body; re-canonicalised.
    pub fn with_body(&self, body: UsageBody) -> Usage {
        Usage::new(body, self.equations.clone())
    }

    pub fn is_end(&self) -> bool {
        self.body == UsageBody::End
    }

    pub fn is_top(&self) -> bool {
        self.body == UsageBody::Top
    }

    fn prune(&mut self) {
        let mut live = BTreeSet::new();
        let mut todo: Vec<Name> = self.body.variables().into_iter().collect();
        while let Some(x) = todo.pop() {
            if live.insert(x.clone()) {
                if let Some(rhs) = self.equations.get(&x) {
                    todo.extend(rhs.variables());
                }
            }
        }
        self.equations.retain(|x, _| live.contains(x));
    }
}

impl fmt::Display for UsageBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageBody::Branch(m) => {
                if m.is_empty() {
                    return write!(f, "end");
                }
                write!(f, "{{")?;
                for (i, (name, w)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{name}; {w}")?;
                }
                write!(f, "}}")
            }
            UsageBody::Choice(m) => {
                write!(f, "<")?;
                for (i, (l, u)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{l}: {u}")?;
                }
                write!(f, ">")
            }
            UsageBody::Var(x) => write!(f, "{x}"),
            UsageBody::End => write!(f, "end"),
            UsageBody::Top => write!(f, "⊤"),
        }
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)?;
        if !self.equations.is_empty() {
            write!(f, "[")?;
            for (i, (x, u)) in self.equations.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x} = {u}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}
