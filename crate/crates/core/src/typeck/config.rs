//! Well-typed run-time configurations: `WTH`, `WTP`, `WTE`, expression
//! typing and `WTD` combined into `WTC`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::class::UsageResult;
use super::expr::{Checker, Omega};
use super::state::{FrameTyping, ObjectTyping, Outcome, TypeError, TypingState};
use crate::ast::{ClassRef, ObjectId, Program, Type, Value};
use crate::diagnostic::Code;
use crate::interp::{Configuration, Heap};
use crate::model::{objects_of, terminated_field_env, FieldTypeEnv};
use crate::usage::Usage;

/// `getType(v, h)`; `None` for a dangling object or an unknown label.
pub fn get_type(program: &Program, heap: &Heap, v: &Value) -> Option<Type> {
    Some(match v {
        Value::Unit => Type::Void,
        Value::True | Value::False => Type::Bool,
        Value::Null => Type::Bottom,
        Value::Label(l) => Type::Enum(program.enum_of_label(l)?.name.clone()),
        Value::Object(o) => {
            let obj = heap.get(*o)?;
            Type::Object(obj.class.clone(), obj.usage.clone())
        }
    })
}

/// The premise of `WTC` a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Premise {
    /// `Λ ⊢ h`
    Heap,
    /// `envT_S ⊢ env_S`
    Stack,
    /// `envT_O ⊢ e`
    Objects,
    /// `Λ; envT_O · envT_S ⊢ e : t`
    Expression,
    /// `Λ ⊢ D̅`
    Declarations,
}

impl Premise {
    pub fn name(self) -> &'static str {
        match self {
            Premise::Heap => "WTH",
            Premise::Stack => "WTP",
            Premise::Objects => "WTE",
            Premise::Expression => "typing",
            Premise::Declarations => "WTD",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WtcViolation {
    pub premise: Premise,
    pub error: TypeError,
}

impl fmt::Display for WtcViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.premise.name(), self.error)
    }
}

fn violation(premise: Premise, code: Code, message: impl Into<String>) -> WtcViolation {
    WtcViolation { premise, error: TypeError::new(code, message) }
}

/// Environments read off a configuration: `Λ` from the heap, `envT_O` from
/// the objects of the expression and `envT_S` from the parameter stack.
pub fn reconstruct(program: &Program, cfg: &Configuration) -> TypingState {
    let ty = |v: &Value| get_type(program, &cfg.heap, v).unwrap_or(Type::Bottom);
    let lambda = cfg
        .heap
        .objects
        .iter()
        .map(|(o, obj)| {
            let fields = obj.fields.iter().map(|(f, v)| (f.clone(), ty(v))).collect();
            (*o, ObjectTyping { class: obj.class.clone(), fields })
        })
        .collect();
    let objects = objects_of(&cfg.expr).into_iter().map(|o| (o, ty(&Value::Object(o)))).collect();
    let stack = cfg
        .stack
        .iter()
        .map(|f| FrameTyping { obj: f.obj, param: Some((f.param.0.clone(), ty(&f.param.1))) })
        .collect();
    TypingState { lambda, objects, stack }
}

/// Checks configurations of one program, remembering which object states
/// were already shown to terminate.
pub struct ConfigTyping<'p> {
    checker: Checker<'p>,
    terminating: RefCell<HashSet<(ClassRef, Usage, FieldTypeEnv)>>,
}

impl<'p> ConfigTyping<'p> {
    pub fn new(program: &'p Program) -> Self {
        ConfigTyping { checker: Checker::new(program), terminating: RefCell::new(HashSet::new()) }
    }

    fn program(&self) -> &'p Program {
        self.checker.program
    }

    /// `WTC` with environments reconstructed from the configuration.
    pub fn check(&self, cfg: &Configuration) -> Result<Type, Vec<WtcViolation>> {
        self.check_against(&reconstruct(self.program(), cfg), cfg)
    }

    /// `WTC` against given environments. Returns the type of the expression.
    pub fn check_against(&self, env: &TypingState, cfg: &Configuration) -> Result<Type, Vec<WtcViolation>> {
        let mut out = Vec::new();
        self.heap(env, cfg, &mut out);
        self.stack(env, cfg, &mut out);
        self.objects(env, cfg, &mut out);
        let typed = match self.checker.expr(env.clone(), 0, &Omega::new(), &cfg.expr) {
            Ok(Outcome::Flows(t, after)) => Some((t, after)),
            // Every path continues an enclosing loop, so the run diverges.
            Ok(Outcome::Jumps(after)) => Some((Type::Void, after)),
            Err(error) => {
                out.push(WtcViolation { premise: Premise::Expression, error });
                None
            }
        };
        if let Some((_, after)) = &typed {
            if after.stack.len() != 1 {
                out.push(violation(
                    Premise::Expression,
                    Code::StackMismatch,
                    "typing does not return to the bottom frame",
                ));
            }
            if !after.objects.is_empty() {
                out.push(violation(Premise::Expression, Code::ObjectEnvMismatch, "free objects are left unconsumed"));
            }
            self.declarations(&after.lambda, cfg, &mut out);
        }
        match (typed, out.is_empty()) {
            (Some((t, _)), true) => Ok(t),
            _ => Err(out),
        }
    }

    fn heap(&self, env: &TypingState, cfg: &Configuration, out: &mut Vec<WtcViolation>) {
        let dom_h: BTreeSet<&ObjectId> = cfg.heap.objects.keys().collect();
        let dom_l: BTreeSet<&ObjectId> = env.lambda.keys().collect();
        if dom_h != dom_l {
            out.push(violation(Premise::Heap, Code::HeapMismatch, "Λ and the heap type different objects"));
        }
        for (o, obj) in &cfg.heap.objects {
            let Some(typing) = env.lambda.get(o) else { continue };
            if typing.class != obj.class {
                out.push(violation(
                    Premise::Heap,
                    Code::HeapMismatch,
                    format!("{o} is typed as `{}` but is a `{}`", typing.class, obj.class),
                ));
            }
            let declared: BTreeSet<String> = match self.checker.view(&obj.class) {
                Ok(view) => view.fields.iter().map(|f| f.name.clone()).collect(),
                Err(e) => {
                    out.push(WtcViolation { premise: Premise::Heap, error: e });
                    continue;
                }
            };
            let stored: BTreeSet<String> = obj.fields.keys().cloned().collect();
            let typed: BTreeSet<String> = typing.fields.keys().cloned().collect();
            if stored != declared || typed != declared {
                out.push(violation(
                    Premise::Heap,
                    Code::HeapMismatch,
                    format!("{o}: field sets of the heap, Λ and `{}` differ", obj.class),
                ));
            }
            for (f, v) in &obj.fields {
                let actual = get_type(self.program(), &cfg.heap, v);
                if typing.fields.get(f) != actual.as_ref() {
                    out.push(violation(
                        Premise::Heap,
                        Code::HeapMismatch,
                        format!(
                            "{o}.{f} holds `{v}` of type `{}` but Λ says `{}`",
                            actual.map(|t| t.to_string()).unwrap_or_else(|| "?".into()),
                            typing.fields.get(f).map(|t| t.to_string()).unwrap_or_default()
                        ),
                    ));
                }
            }
        }
    }

    fn stack(&self, env: &TypingState, cfg: &Configuration, out: &mut Vec<WtcViolation>) {
        if env.stack.len() != cfg.stack.len() {
            out.push(violation(
                Premise::Stack,
                Code::StackMismatch,
                format!("{} typed frames for {} stack frames", env.stack.len(), cfg.stack.len()),
            ));
            return;
        }
        for (typed, frame) in env.stack.iter().zip(&cfg.stack) {
            let actual = get_type(self.program(), &cfg.heap, &frame.param.1);
            let ok = typed.obj == frame.obj
                && matches!(&typed.param, Some((x, t)) if *x == frame.param.0 && Some(t) == actual.as_ref());
            if !ok {
                out.push(violation(
                    Premise::Stack,
                    Code::StackMismatch,
                    format!(
                        "frame of {} with `{} = {}` does not match its typing",
                        frame.obj, frame.param.0, frame.param.1
                    ),
                ));
            }
        }
    }

    fn objects(&self, env: &TypingState, cfg: &Configuration, out: &mut Vec<WtcViolation>) {
        let in_expr: BTreeSet<ObjectId> = objects_of(&cfg.expr).into_iter().collect();
        let typed: BTreeSet<ObjectId> = env.objects.keys().copied().collect();
        if in_expr != typed {
            out.push(violation(
                Premise::Objects,
                Code::ObjectEnvMismatch,
                "envT_O does not bind exactly the objects of the expression",
            ));
        }
        for (o, t) in &env.objects {
            if get_type(self.program(), &cfg.heap, &Value::Object(*o)).as_ref() != Some(t) {
                out.push(violation(Premise::Objects, Code::ObjectEnvMismatch, format!("{o} is typed `{t}` in envT_O")));
            }
        }
    }

    /// Each object can follow its remaining usage to a terminated field
    /// environment. Field types are taken after the expression is typed, so
    /// objects in the middle of a method are checked once that method has
    /// finished.
    fn declarations(
        &self,
        lambda: &BTreeMap<ObjectId, ObjectTyping>,
        cfg: &Configuration,
        out: &mut Vec<WtcViolation>,
    ) {
        for (o, obj) in &cfg.heap.objects {
            let Some(typing) = lambda.get(o) else {
                out.push(violation(Premise::Declarations, Code::HeapMismatch, format!("{o} is missing from Λ")));
                continue;
            };
            let key = (obj.class.clone(), obj.usage.clone(), typing.fields.clone());
            if self.terminating.borrow().contains(&key) {
                continue;
            }
            let view = match self.checker.view(&obj.class) {
                Ok(v) => v,
                Err(error) => {
                    out.push(WtcViolation { premise: Premise::Declarations, error });
                    continue;
                }
            };
            match self.checker.usage(&view, *o, &obj.usage, typing.fields.clone(), &BTreeMap::new()) {
                Ok((UsageResult::Concrete(env), _)) if !terminated_field_env(&env) => out.push(violation(
                    Premise::Declarations,
                    Code::NonTerminatedAfterUsage,
                    format!("{o} finishes `{}` with linear fields", obj.usage),
                )),
                Ok(_) => {
                    self.terminating.borrow_mut().insert(key);
                }
                Err(e) => out.push(WtcViolation {
                    premise: Premise::Declarations,
                    error: TypeError::new(e.error.code, format!("{o} in state `{}`: {}", obj.usage, e.error.message)),
                }),
            }
        }
    }
}

/// `WTC` for a single configuration with reconstructed environments.
pub fn well_typed_configuration(program: &Program, cfg: &Configuration) -> Result<Type, Vec<WtcViolation>> {
    ConfigTyping::new(program).check(cfg)
}
