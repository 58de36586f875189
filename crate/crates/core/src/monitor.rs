//! The error predicate `→err` over configurations.

use std::fmt;

use serde::Serialize;

use crate::ast::{Expr, Ref, Value};
use crate::diagnostic::Taxonomy;
use crate::interp::{Configuration, StuckReason};
use crate::lts::step_method;
use crate::parser::expr_to_line;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    NullCall1,
    NullCall2,
    MthdNotAv1,
    MthdNotAv2,
    FldErr,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::NullCall1 => "NullCall1",
            ErrorKind::NullCall2 => "NullCall2",
            ErrorKind::MthdNotAv1 => "MthdNotAv1",
            ErrorKind::MthdNotAv2 => "MthdNotAv2",
            ErrorKind::FldErr => "FldErr",
        }
    }

    pub fn taxonomy(self) -> Taxonomy {
        match self {
            ErrorKind::NullCall1 | ErrorKind::FldErr => Taxonomy::FieldNotAvailable,
            ErrorKind::NullCall2 => Taxonomy::ParameterNotAvailable,
            ErrorKind::MthdNotAv1 | ErrorKind::MthdNotAv2 => Taxonomy::MethodNotAvailable,
        }
    }

    /// The stuck reason the interpreter reports for the same fault.
    pub fn stuck_reason(self) -> StuckReason {
        match self {
            ErrorKind::NullCall1 => StuckReason::NullCall1,
            ErrorKind::NullCall2 => StuckReason::NullCall2,
            ErrorKind::MthdNotAv1 => StuckReason::MthdNotAv1,
            ErrorKind::MthdNotAv2 => StuckReason::MthdNotAv2,
            ErrorKind::FldErr => StuckReason::FldErr,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fault found by the predicate. `path` lists the composite rules used to
/// reach the faulty subexpression, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub taxonomy: Taxonomy,
    pub path: Vec<&'static str>,
    pub excerpt: String,
}

impl RuntimeError {
    pub fn report(&self, step: u64) -> String {
        format!("runtime-error: {} ({}) at step {step}: {}", self.kind, self.taxonomy, self.excerpt)
    }
}

fn excerpt(e: &Expr) -> String {
    let s = expr_to_line(e);
    if s.chars().count() > 80 {
        format!("{}...", s.chars().take(77).collect::<String>())
    } else {
        s
    }
}

/// `⟨h, env_S, e⟩ →err`, descending through composite expressions as the
/// `*CErr` rules do.
pub fn check_error(cfg: &Configuration) -> Option<RuntimeError> {
    let mut path = Vec::new();
    let mut e = &cfg.expr;
    loop {
        let next = match e {
            Expr::Assign(_, rhs) if rhs.as_value().is_none() => Some(("FldCErr", rhs)),
            Expr::Call(_, _, arg) if arg.as_value().is_none() => Some(("CallCErr", arg)),
            Expr::Return(body) if body.as_value().is_none() => Some(("RetCErr", body)),
            Expr::Seq(a, _) if a.as_value().is_none() => Some(("SeqCErr", a)),
            Expr::If(c, _, _) if c.as_value().is_none() => Some(("IfCErr", c)),
            Expr::Switch { scrutinee, .. } if scrutinee.as_value().is_none() => Some(("SwCErr", scrutinee)),
            _ => None,
        };
        match next {
            Some((rule, inner)) => {
                path.push(rule);
                e = inner;
            }
            None => break,
        }
    }
    let kind = ground_error(cfg, e)?;
    Some(RuntimeError { kind, taxonomy: kind.taxonomy(), path, excerpt: excerpt(e) })
}

fn ground_error(cfg: &Configuration, e: &Expr) -> Option<ErrorKind> {
    let frame = cfg.stack.last()?;
    let fields = &cfg.heap.get(frame.obj)?.fields;
    match e {
        Expr::Ref(Ref::Field(f)) if !fields.contains_key(f) => Some(ErrorKind::FldErr),
        Expr::Call(r, m, arg) if arg.as_value().is_some() => {
            let (target, null, unavailable) = match r {
                Ref::Field(f) => (fields.get(f)?, ErrorKind::NullCall1, ErrorKind::MthdNotAv1),
                Ref::Param(x) if frame.param.0 == *x => (&frame.param.1, ErrorKind::NullCall2, ErrorKind::MthdNotAv2),
                Ref::Param(_) => return None,
            };
            match target {
                Value::Null => Some(null),
                Value::Object(o) => {
                    let usage = &cfg.heap.get(*o)?.usage;
                    match step_method(usage, m) {
                        Ok(Some(_)) => None,
                        _ => Some(unavailable),
                    }
                }
                _ => None,
            }
        }
        _ => None,
    }
}
