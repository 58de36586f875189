//! Expression typing: `Λ; Δ ⊢Ω e : t ▷ Λ'; Δ'`.
//!
//! A run-time expression may contain nested `return{..}` blocks. The part
//! of the expression outside any return belongs to the bottom stack frame,
//! and each enclosing return moves one frame up; `base` is the index of the
//! frame the current subexpression runs in.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::state::{Outcome, TypeError, TypingState};
use crate::ast::{ClassRef, Expr, Name, Program, Ref, Type, Value};
use crate::diagnostic::Code;
use crate::lts::step_method;
use crate::model::{agree, class_info, class_usage, lin_type, method_sig, ClassInfoError, ClassView};
use crate::parser::expr_to_line;
use crate::usage::UsageBody;

type TResult<T> = Result<T, TypeError>;

/// Label environment `Ω`.
pub type Omega = BTreeMap<Name, TypingState>;

pub struct Checker<'p> {
    pub program: &'p Program,
    views: RefCell<HashMap<ClassRef, Rc<ClassView>>>,
}

fn info_error(e: ClassInfoError) -> TypeError {
    match e {
        ClassInfoError::UnknownClass(_) => TypeError::new(Code::UndeclaredName, e.to_string()),
        _ => TypeError::new(Code::ArityMismatch, e.to_string()),
    }
}

fn excerpt(e: &Expr) -> String {
    let s = expr_to_line(e);
    if s.chars().count() > 60 {
        format!("{}...", s.chars().take(57).collect::<String>())
    } else {
        s
    }
}

impl<'p> Checker<'p> {
    pub fn new(program: &'p Program) -> Self {
        Checker { program, views: RefCell::new(HashMap::new()) }
    }

    pub fn view(&self, class: &ClassRef) -> TResult<Rc<ClassView>> {
        if let Some(v) = self.views.borrow().get(class) {
            return Ok(v.clone());
        }
        let v = Rc::new(class_info(self.program, class).map_err(info_error)?);
        self.views.borrow_mut().insert(class.clone(), v.clone());
        Ok(v)
    }

    fn frame_index(st: &TypingState, base: usize) -> TResult<usize> {
        if base < st.stack.len() {
            Ok(base)
        } else {
            Err(TypeError::new(Code::StackMismatch, "expression refers to a missing stack frame"))
        }
    }

    /// Current type of a reference, without consuming it.
    fn ref_type(&self, st: &TypingState, base: usize, r: &Ref) -> TResult<Type> {
        let frame = &st.stack[Self::frame_index(st, base)?];
        match r {
            Ref::Param(x) => match &frame.param {
                Some((n, t)) if n == x => Ok(t.clone()),
                _ => Err(TypeError::new(Code::UndeclaredName, format!("`{x}` is not the current parameter"))),
            },
            Ref::Field(f) => {
                let obj = st.lambda.get(&frame.obj).ok_or_else(|| {
                    TypeError::new(Code::HeapMismatch, format!("object {} has no field typing", frame.obj))
                })?;
                obj.fields.get(f).cloned().ok_or_else(|| {
                    TypeError::new(Code::FieldNotUnderstood, format!("class `{}` has no field `{f}`", obj.class))
                })
            }
        }
    }

    fn set_ref_type(st: &mut TypingState, base: usize, r: &Ref, t: Type) {
        let frame = &mut st.stack[base];
        match r {
            Ref::Param(_) => {
                if let Some((_, slot)) = &mut frame.param {
                    *slot = t;
                }
            }
            Ref::Field(f) => {
                if let Some(obj) = st.lambda.get_mut(&frame.obj) {
                    obj.fields.insert(f.clone(), t);
                }
            }
        }
    }

    /// The typestate behind a receiver, or the error for calling through it.
    fn receiver(&self, st: &TypingState, base: usize, r: &Ref, what: &str) -> TResult<(ClassRef, crate::usage::Usage)> {
        match self.ref_type(st, base, r)? {
            Type::Object(c, u) => Ok((c, u)),
            Type::Bottom => Err(match r {
                Ref::Field(f) => {
                    TypeError::new(Code::FieldNotAvailable, format!("field `{f}` may be null when {what}"))
                }
                Ref::Param(x) => {
                    TypeError::new(Code::ParameterNotAvailable, format!("parameter `{x}` may be null when {what}"))
                }
            }),
            Type::Var(g) => Err(TypeError::new(
                Code::MethodNotAvailable,
                format!(
                    "`{}` has the generic type `{}[{}]`, which offers no methods",
                    r.name(),
                    g.class_var,
                    g.usage_var
                ),
            )),
            other => Err(TypeError::new(
                Code::MethodNotUnderstood,
                format!("`{}` has type `{other}`, which has no methods", r.name()),
            )),
        }
    }

    pub fn expr(&self, st: TypingState, base: usize, omega: &Omega, e: &Expr) -> TResult<Outcome> {
        match e {
            Expr::Value(v) => self.value(st, v),
            Expr::Ref(r) => {
                let t = self.ref_type(&st, base, r)?;
                let mut st = st;
                if lin_type(&t) {
                    Self::set_ref_type(&mut st, base, r, Type::Bottom);
                }
                Ok(Outcome::Flows(t, st))
            }
            Expr::New(c) => {
                let class = ClassRef::plain(c.clone());
                let usage = class_usage(self.program, &class).map_err(info_error)?;
                Ok(Outcome::Flows(Type::Object(class, usage), st))
            }
            Expr::NewGen(c, g) => {
                if !matches!(**g, Type::Object(..) | Type::Var(_)) {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("`{g}` cannot instantiate a generic class"),
                    ));
                }
                let class = ClassRef::generic(c.clone(), (**g).clone());
                let usage = class_usage(self.program, &class).map_err(info_error)?;
                Ok(Outcome::Flows(Type::Object(class, usage), st))
            }
            Expr::Assign(f, rhs) => {
                let (t, mut st) = match self.expr(st, base, omega, rhs)? {
                    Outcome::Flows(t, s) => (t, s),
                    jump => return Ok(jump),
                };
                let i = Self::frame_index(&st, base)?;
                let o = st.stack[i].obj;
                let obj = st
                    .lambda
                    .get(&o)
                    .ok_or_else(|| TypeError::new(Code::HeapMismatch, format!("object {o} has no field typing")))?;
                let view = self.view(&obj.class)?;
                let Some(declared) = view.field_type(f) else {
                    return Err(TypeError::new(
                        Code::FieldNotUnderstood,
                        format!("class `{}` has no field `{f}`", obj.class),
                    ));
                };
                let current = obj.fields.get(f).cloned().unwrap_or(Type::Bottom);
                if lin_type(&current) {
                    return Err(TypeError::new(
                        Code::FieldMisused,
                        format!("assignment to `{f}` overwrites a value of linear type `{current}`"),
                    ));
                }
                if !agree(declared, &t) {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("field `{f}` is declared `{declared}` but is assigned `{t}`"),
                    ));
                }
                Self::set_ref_type(&mut st, base, &Ref::Field(f.clone()), t);
                Ok(Outcome::Flows(Type::Void, st))
            }
            Expr::Call(r, m, arg) => {
                let (t_arg, mut st) = match self.expr(st, base, omega, arg)? {
                    Outcome::Flows(t, s) => (t, s),
                    jump => return Ok(jump),
                };
                let what = format!("calling `{m}`");
                let (class, usage) = self.receiver(&st, base, r, &what)?;
                if class.is_top() {
                    return Err(TypeError::new(
                        Code::MethodNotAvailable,
                        format!("`{}` has an unknown generic type; `{m}` cannot be called on it", r.name()),
                    ));
                }
                let sig = method_sig(self.program, &class, m).map_err(info_error)?.ok_or_else(|| {
                    TypeError::new(Code::MethodNotUnderstood, format!("class `{class}` has no method `{m}`"))
                })?;
                let next = step_method(&usage, m)
                    .map_err(|err| TypeError::new(Code::UnfoldCycle, err.to_string()))?
                    .ok_or_else(|| {
                        TypeError::new(
                            Code::MethodNotAvailable,
                            format!("`{m}` is not available on `{}` in state `{usage}`", r.name()),
                        )
                    })?;
                if t_arg != sig.param_type {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("`{m}` expects an argument of type `{}` but got `{t_arg}`", sig.param_type),
                    ));
                }
                Self::set_ref_type(&mut st, base, r, Type::Object(class, next));
                Ok(Outcome::Flows(sig.return_type, st))
            }
            Expr::Seq(a, b) => match self.expr(st, base, omega, a)? {
                Outcome::Flows(t, st) => {
                    if lin_type(&t) {
                        return Err(TypeError::new(
                            Code::LinearValueDiscarded,
                            format!("the value of `{}` has linear type `{t}` and is discarded", excerpt(a)),
                        ));
                    }
                    self.expr(st, base, omega, b)
                }
                Outcome::Jumps(at) => self.expr(at, base, omega, b),
            },
            Expr::If(c, a, b) => {
                let (tc, st) = match self.expr(st, base, omega, c)? {
                    Outcome::Flows(t, s) => (t, s),
                    jump => return Ok(jump),
                };
                if tc != Type::Bool {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("condition `{}` has type `{tc}`, expected `bool`", excerpt(c)),
                    ));
                }
                let oa = self.expr(st.clone(), base, omega, a)?;
                let ob = self.expr(st, base, omega, b)?;
                join(vec![oa, ob], "branches of `if`")
            }
            Expr::Switch { receiver, method, scrutinee, branches } => {
                let (ts, st) = match self.expr(st, base, omega, scrutinee)? {
                    Outcome::Flows(t, s) => (t, s),
                    jump => return Ok(jump),
                };
                let Type::Enum(enum_name) = &ts else {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("switch on `{receiver}.{method}` needs an enum result, found `{ts}`"),
                    ));
                };
                let enum_labels: BTreeSet<&Name> =
                    self.program.enum_decl(enum_name).map(|d| d.labels.iter().collect()).unwrap_or_default();
                let (class, usage) = self.receiver(&st, base, receiver, &format!("switching on `{method}`"))?;
                let UsageBody::Choice(choice) = usage.body() else {
                    return Err(TypeError::new(
                        Code::SwitchLabelMismatch,
                        format!("`{}` is in state `{usage}`, which is not a choice", receiver.name()),
                    ));
                };
                let offered: BTreeSet<&Name> = choice.keys().collect();
                let handled: BTreeSet<&Name> = branches.keys().collect();
                if offered != handled || handled != enum_labels {
                    let show = |s: &BTreeSet<&Name>| s.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" ");
                    return Err(TypeError::new(
                        Code::SwitchLabelMismatch,
                        format!(
                            "switch handles {{{}}}, the usage offers {{{}}} and enum `{enum_name}` has {{{}}}",
                            show(&handled),
                            show(&offered),
                            show(&enum_labels)
                        ),
                    ));
                }
                let mut outcomes = Vec::new();
                for (l, body) in branches {
                    let mut branch_st = st.clone();
                    let next = usage.with_body(choice[l].clone());
                    Self::set_ref_type(&mut branch_st, base, receiver, Type::Object(class.clone(), next));
                    outcomes.push(self.expr(branch_st, base, omega, body)?);
                }
                join(outcomes, "branches of `switch`")
            }
            Expr::Label(k, body) => {
                let mut inner = omega.clone();
                inner.insert(k.clone(), st.clone());
                match self.expr(st, base, &inner, body)? {
                    Outcome::Flows(Type::Void, s) => Ok(Outcome::Flows(Type::Void, s)),
                    Outcome::Flows(t, _) => {
                        Err(TypeError::new(Code::TypeMismatch, format!("loop `{k}` has type `{t}`, expected `void`")))
                    }
                    jump => Ok(jump),
                }
            }
            Expr::Continue(k) => match omega.get(k) {
                None => {
                    Err(TypeError::new(Code::UnboundLoopLabel, format!("`continue {k}` has no enclosing loop `{k}`")))
                }
                Some(saved) if *saved == st => Ok(Outcome::Jumps(st)),
                Some(saved) => {
                    Err(TypeError::new(Code::LoopEnvMismatch, format!("at `continue {k}`: {}", saved.difference(&st))))
                }
            },
            Expr::Return(body) => {
                let out = self.expr(st, base + 1, omega, body)?;
                let mut st = match &out {
                    Outcome::Flows(_, s) | Outcome::Jumps(s) => s.clone(),
                };
                if st.stack.len() != base + 2 {
                    return Err(TypeError::new(
                        Code::StackMismatch,
                        format!("`return` at depth {} with {} stack frames", base + 1, st.stack.len()),
                    ));
                }
                let frame = st.stack.pop().expect("checked length");
                match out {
                    Outcome::Flows(t, _) => {
                        if let Some((x, tx)) = &frame.param {
                            if lin_type(tx) {
                                return Err(TypeError::new(
                                    Code::ParameterMisused,
                                    format!("parameter `{x}` still has linear type `{tx}` when the method returns"),
                                ));
                            }
                        }
                        Ok(Outcome::Flows(t, st))
                    }
                    Outcome::Jumps(_) => Ok(Outcome::Jumps(st)),
                }
            }
        }
    }

    fn value(&self, mut st: TypingState, v: &Value) -> TResult<Outcome> {
        let t = match v {
            Value::Unit => Type::Void,
            Value::True | Value::False => Type::Bool,
            Value::Null => Type::Bottom,
            Value::Label(l) => match self.program.enum_of_label(l) {
                Some(d) => Type::Enum(d.name.clone()),
                None => return Err(TypeError::new(Code::UndeclaredName, format!("`{l}` is not an enum label"))),
            },
            Value::Object(o) => st.objects.remove(o).ok_or_else(|| {
                TypeError::new(Code::ObjectEnvMismatch, format!("object {o} is not among the free objects"))
            })?,
        };
        Ok(Outcome::Flows(t, st))
    }
}

/// Joins the outcomes of alternative branches. Branches that flow must agree
/// exactly; branches that jump adopt whatever the others produce.
fn join(outcomes: Vec<Outcome>, what: &str) -> TResult<Outcome> {
    let mut flow: Option<(Type, TypingState)> = None;
    let mut first_jump = None;
    for o in outcomes {
        match o {
            Outcome::Flows(t, s) => match &flow {
                None => flow = Some((t, s)),
                Some((t0, s0)) => {
                    if *t0 != t {
                        return Err(TypeError::new(
                            Code::BranchMismatch,
                            format!("{what} have types `{t0}` and `{t}`"),
                        ));
                    }
                    if *s0 != s {
                        return Err(TypeError::new(
                            Code::BranchMismatch,
                            format!("{what} disagree: {}", s0.difference(&s)),
                        ));
                    }
                }
            },
            Outcome::Jumps(s) => {
                first_jump.get_or_insert(s);
            }
        }
    }
    match (flow, first_jump) {
        (Some((t, _)), Some(_)) if t != Type::Void => Err(TypeError::new(
            Code::BranchMismatch,
            format!("{what}: one path continues a loop, another yields `{t}`"),
        )),
        (Some((t, s)), _) => Ok(Outcome::Flows(t, s)),
        (None, Some(s)) => Ok(Outcome::Jumps(s)),
        (None, None) => Err(TypeError::new(Code::EmptyBranch, format!("{what}: no alternatives"))),
    }
}
