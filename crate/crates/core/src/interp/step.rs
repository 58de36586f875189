use std::fmt;

use serde::Serialize;

use super::{Configuration, Frame, HeapObject};
use crate::ast::{ClassRef, Expr, ObjectId, Program, Ref, Value};
use crate::lts::{step_label, step_method};
use crate::model::{class_info, class_usage, init_vals};

/// Names of the reduction rules, ground and contextual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    UParam,
    LParam,
    UDeref,
    LDeref,
    Upd,
    New,
    NewGen,
    CallP,
    CallF,
    Ret,
    IfTrue,
    IfFls,
    SwF,
    SwP,
    Lbl,
    Seq,
    FldC,
    MthdC,
    RetC,
    SeqC,
    IfC,
    SwC,
}

impl Rule {
    pub const ALL: &'static [Rule] = &[
        Rule::UParam,
        Rule::LParam,
        Rule::UDeref,
        Rule::LDeref,
        Rule::Upd,
        Rule::New,
        Rule::NewGen,
        Rule::CallP,
        Rule::CallF,
        Rule::Ret,
        Rule::IfTrue,
        Rule::IfFls,
        Rule::SwF,
        Rule::SwP,
        Rule::Lbl,
        Rule::Seq,
        Rule::FldC,
        Rule::MthdC,
        Rule::RetC,
        Rule::SeqC,
        Rule::IfC,
        Rule::SwC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::UParam => "uParam",
            Rule::LParam => "lParam",
            Rule::UDeref => "uDeref",
            Rule::LDeref => "lDeref",
            Rule::Upd => "Upd",
            Rule::New => "New",
            Rule::NewGen => "NewGen",
            Rule::CallP => "CallP",
            Rule::CallF => "CallF",
            Rule::Ret => "Ret",
            Rule::IfTrue => "IfTrue",
            Rule::IfFls => "IfFls",
            Rule::SwF => "SwF",
            Rule::SwP => "SwP",
            Rule::Lbl => "Lbl",
            Rule::Seq => "Seq",
            Rule::FldC => "FldC",
            Rule::MthdC => "MthdC",
            Rule::RetC => "RetC",
            Rule::SeqC => "SeqC",
            Rule::IfC => "IfC",
            Rule::SwC => "SwC",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why no rule applies to a non-terminal configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum StuckReason {
    NullCall1,
    NullCall2,
    MthdNotAv1,
    MthdNotAv2,
    FldErr,
    MethodNotUnderstood,
    FieldMisused,
    ParameterMisused,
    LinearValueDiscarded,
    NonBoolCondition,
    LabelNotOffered,
    MissingBranch,
    UnboundContinue,
    IllFormed(String),
}

impl StuckReason {
    pub fn kind(&self) -> &'static str {
        match self {
            StuckReason::NullCall1 => "NullCall1",
            StuckReason::NullCall2 => "NullCall2",
            StuckReason::MthdNotAv1 => "MthdNotAv1",
            StuckReason::MthdNotAv2 => "MthdNotAv2",
            StuckReason::FldErr => "FldErr",
            StuckReason::MethodNotUnderstood => "MethodNotUnderstood",
            StuckReason::FieldMisused => "FieldMisused",
            StuckReason::ParameterMisused => "ParameterMisused",
            StuckReason::LinearValueDiscarded => "LinearValueDiscarded",
            StuckReason::NonBoolCondition => "NonBoolCondition",
            StuckReason::LabelNotOffered => "LabelNotOffered",
            StuckReason::MissingBranch => "MissingBranch",
            StuckReason::UnboundContinue => "UnboundContinue",
            StuckReason::IllFormed(_) => "IllFormed",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::IllFormed(why) => write!(f, "IllFormed ({why})"),
            other => f.write_str(other.kind()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    /// One step was taken; the rules from the outermost context inwards.
    Stepped(Vec<Rule>),
    /// The expression is a value and only the `main` frame remains.
    Terminal(Value),
    Stuck(StuckReason),
}

type Reduce = Result<(), StuckReason>;

fn ill(why: impl Into<String>) -> StuckReason {
    StuckReason::IllFormed(why.into())
}

struct Stepper<'a> {
    program: &'a Program,
    cfg: &'a mut Configuration,
    rules: Vec<Rule>,
}

/// Performs one reduction step in place.
pub fn step(program: &Program, cfg: &mut Configuration) -> StepResult {
    if let Expr::Value(v) = &cfg.expr {
        return if cfg.stack.len() == 1 {
            StepResult::Terminal(v.clone())
        } else {
            StepResult::Stuck(ill("a value with pending stack frames"))
        };
    }
    let mut expr = std::mem::replace(&mut cfg.expr, Expr::unit());
    let mut s = Stepper { program, cfg, rules: Vec::new() };
    let r = s.reduce(&mut expr);
    let rules = std::mem::take(&mut s.rules);
    cfg.expr = expr;
    match r {
        Ok(()) => StepResult::Stepped(rules),
        Err(reason) => StepResult::Stuck(reason),
    }
}

impl Stepper<'_> {
    fn top(&self) -> Result<&Frame, StuckReason> {
        self.cfg.stack.last().ok_or_else(|| ill("empty stack"))
    }

    fn top_obj(&self) -> Result<ObjectId, StuckReason> {
        Ok(self.top()?.obj)
    }

    fn field(&self, f: &str) -> Result<Value, StuckReason> {
        let o = self.top_obj()?;
        let obj = self.cfg.heap.get(o).ok_or_else(|| ill(format!("{o} is not in the heap")))?;
        obj.fields.get(f).cloned().ok_or(StuckReason::FldErr)
    }

    fn set_field(&mut self, f: &str, v: Value) -> Reduce {
        let o = self.top_obj()?;
        let obj = self.cfg.heap.get_mut(o).ok_or_else(|| ill(format!("{o} is not in the heap")))?;
        obj.fields.insert(f.to_string(), v);
        Ok(())
    }

    fn param(&self, x: &str) -> Result<Value, StuckReason> {
        let frame = self.top()?;
        if frame.param.0 != x {
            return Err(ill(format!("`{x}` is not the current parameter")));
        }
        Ok(frame.param.1.clone())
    }

    fn set_param(&mut self, v: Value) -> Reduce {
        let frame = self.cfg.stack.last_mut().ok_or_else(|| ill("empty stack"))?;
        frame.param.1 = v;
        Ok(())
    }

    fn context(&mut self, rule: Rule, e: &mut Expr) -> Reduce {
        self.rules.push(rule);
        self.reduce(e)
    }

    fn ground(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    fn reduce(&mut self, e: &mut Expr) -> Reduce {
        match e {
            Expr::Value(_) => Err(ill("no redex in a value")),
            Expr::Ref(Ref::Param(x)) => {
                let v = self.param(x)?;
                if self.cfg.heap.is_linear(&v) {
                    self.set_param(Value::Null)?;
                    self.ground(Rule::LParam);
                } else {
                    self.ground(Rule::UParam);
                }
                *e = Expr::Value(v);
                Ok(())
            }
            Expr::Ref(Ref::Field(f)) => {
                let v = self.field(f)?;
                if self.cfg.heap.is_linear(&v) {
                    self.set_field(f, Value::Null)?;
                    self.ground(Rule::LDeref);
                } else {
                    self.ground(Rule::UDeref);
                }
                *e = Expr::Value(v);
                Ok(())
            }
            Expr::New(c) => {
                let class = ClassRef::plain(c.clone());
                self.alloc(e, class, Rule::New)
            }
            Expr::NewGen(c, g) => {
                let class = ClassRef::generic(c.clone(), (**g).clone());
                self.alloc(e, class, Rule::NewGen)
            }
            Expr::Assign(f, rhs) => {
                let Expr::Value(v) = rhs.as_ref() else {
                    return self.context(Rule::FldC, rhs);
                };
                let old = self.field(f)?;
                if self.cfg.heap.is_linear(&old) {
                    return Err(StuckReason::FieldMisused);
                }
                let v = v.clone();
                self.set_field(f, v)?;
                self.ground(Rule::Upd);
                *e = Expr::unit();
                Ok(())
            }
            Expr::Call(r, m, arg) => {
                let Expr::Value(v) = arg.as_ref() else {
                    return self.context(Rule::MthdC, arg);
                };
                let v = v.clone();
                let (target, null, unavailable, rule) = match r {
                    Ref::Field(f) => (self.field(f)?, StuckReason::NullCall1, StuckReason::MthdNotAv1, Rule::CallF),
                    Ref::Param(x) => (self.param(x)?, StuckReason::NullCall2, StuckReason::MthdNotAv2, Rule::CallP),
                };
                let o = match target {
                    Value::Object(o) => o,
                    Value::Null => return Err(null),
                    _ => return Err(StuckReason::MethodNotUnderstood),
                };
                let obj = self.cfg.heap.get(o).ok_or_else(|| ill(format!("{o} is not in the heap")))?;
                let next = step_method(&obj.usage, m).map_err(|err| ill(err.to_string()))?.ok_or(unavailable)?;
                let view = class_info(self.program, &obj.class).map_err(|err| ill(err.to_string()))?;
                let method = view.method(m).ok_or(StuckReason::MethodNotUnderstood)?;
                let body = method.body.clone();
                let param_name = method.param_name.clone();
                self.cfg.heap.get_mut(o).expect("checked above").usage = next;
                self.cfg.stack.push(Frame { obj: o, param: (param_name, v) });
                self.ground(rule);
                *e = Expr::Return(Box::new(body));
                Ok(())
            }
            Expr::Return(body) => {
                let Expr::Value(v) = body.as_ref() else {
                    return self.context(Rule::RetC, body);
                };
                if self.cfg.stack.len() < 2 {
                    return Err(ill("return without a caller frame"));
                }
                if self.cfg.heap.is_linear(&self.top()?.param.1) {
                    return Err(StuckReason::ParameterMisused);
                }
                let v = v.clone();
                self.cfg.stack.pop();
                self.ground(Rule::Ret);
                *e = Expr::Value(v);
                Ok(())
            }
            Expr::Seq(a, b) => {
                let Expr::Value(v) = a.as_ref() else {
                    return self.context(Rule::SeqC, a);
                };
                if self.cfg.heap.is_linear(v) {
                    return Err(StuckReason::LinearValueDiscarded);
                }
                self.ground(Rule::Seq);
                *e = std::mem::replace(b.as_mut(), Expr::unit());
                Ok(())
            }
            Expr::If(c, a, b) => {
                let next = match c.as_ref() {
                    Expr::Value(Value::True) => {
                        self.ground(Rule::IfTrue);
                        std::mem::replace(a.as_mut(), Expr::unit())
                    }
                    Expr::Value(Value::False) => {
                        self.ground(Rule::IfFls);
                        std::mem::replace(b.as_mut(), Expr::unit())
                    }
                    Expr::Value(_) => return Err(StuckReason::NonBoolCondition),
                    _ => return self.context(Rule::IfC, c),
                };
                *e = next;
                Ok(())
            }
            Expr::Switch { receiver, scrutinee, branches, .. } => {
                let l = match scrutinee.as_ref() {
                    Expr::Value(Value::Label(l)) => l.clone(),
                    Expr::Value(_) => return Err(ill("switch on a non-label value")),
                    _ => return self.context(Rule::SwC, scrutinee),
                };
                let (target, rule) = match receiver {
                    Ref::Field(f) => (self.field(f)?, Rule::SwF),
                    Ref::Param(x) => (self.param(x)?, Rule::SwP),
                };
                let Value::Object(o) = target else {
                    return Err(match receiver {
                        Ref::Field(_) => StuckReason::NullCall1,
                        Ref::Param(_) => StuckReason::NullCall2,
                    });
                };
                let obj = self.cfg.heap.get_mut(o).ok_or_else(|| ill(format!("{o} is not in the heap")))?;
                let next = step_label(&obj.usage, &l)
                    .map_err(|err| ill(err.to_string()))?
                    .ok_or(StuckReason::LabelNotOffered)?;
                let branch = branches.remove(&l).ok_or(StuckReason::MissingBranch)?;
                obj.usage = next;
                self.ground(rule);
                *e = branch;
                Ok(())
            }
            Expr::Label(k, body) => {
                let unfolded = body.substitute_continue(k, &Expr::Label(k.clone(), body.clone()));
                self.ground(Rule::Lbl);
                *e = unfolded;
                Ok(())
            }
            Expr::Continue(_) => Err(StuckReason::UnboundContinue),
        }
    }

    fn alloc(&mut self, e: &mut Expr, class: ClassRef, rule: Rule) -> Reduce {
        let view = class_info(self.program, &class).map_err(|err| ill(err.to_string()))?;
        let usage = class_usage(self.program, &class).map_err(|err| ill(err.to_string()))?;
        let o = self.cfg.heap.alloc(HeapObject { class, usage, fields: init_vals(&view.fields) });
        self.ground(rule);
        *e = Expr::obj(o);
        Ok(())
    }
}
