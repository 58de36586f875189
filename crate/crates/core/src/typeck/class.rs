//! Class usage typing `Θ; envT_F ⊢ C⟨t⟩[U] ▷ envT_F'` and the class and
//! program rules built on it.

use std::collections::BTreeMap;
use std::fmt;

use super::expr::{Checker, Omega};
use super::state::{Outcome, TypeError, TypingState};
use crate::ast::{ClassDecl, ClassRef, Expr, Name, ObjectId, Program, Type};
use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::model::{
    init_types, objects_of, returns_of, terminated_field_env, terminated_type, ClassView, FieldTypeEnv,
};
use crate::usage::{Usage, UsageBody};

/// Identity standing for `this` while checking a class in isolation.
pub const THIS: ObjectId = ObjectId(u32::MAX);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsageRule {
    TCBr,
    TCCh,
    TCEn,
    TCVar,
    TCRec,
}

impl fmt::Display for UsageRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Derivation tree of a class usage judgement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: UsageRule,
    pub children: Vec<Derivation>,
}

impl Derivation {
    /// Rules along the derivation, depth first. A single premise continues
    /// the list; several premises are each wrapped in braces.
    pub fn summary(&self) -> String {
        let mut out = self.rule.to_string();
        match self.children.as_slice() {
            [] => {}
            [only] => {
                out.push_str(", ");
                out.push_str(&only.summary());
            }
            many => {
                for c in many {
                    out.push_str(", {");
                    out.push_str(&c.summary());
                    out.push('}');
                }
            }
        }
        out
    }
}

/// `envT_F'` from a usage judgement. `Any` arises from `TCVar`, whose
/// output environment is unconstrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UsageResult {
    Concrete(FieldTypeEnv),
    Any,
}

/// An error found while following a usage, with the method it occurred in.
#[derive(Debug, Clone)]
pub struct UsageError {
    pub error: TypeError,
    pub method: Option<Name>,
}

impl From<TypeError> for UsageError {
    fn from(error: TypeError) -> Self {
        UsageError { error, method: None }
    }
}

fn join_results(results: Vec<UsageResult>, what: &str) -> Result<UsageResult, TypeError> {
    let mut out = UsageResult::Any;
    for r in results {
        match (&out, r) {
            (_, UsageResult::Any) => {}
            (UsageResult::Any, c) => out = c,
            (UsageResult::Concrete(a), UsageResult::Concrete(b)) => {
                if *a != b {
                    let diff = a
                        .iter()
                        .find(|(f, t)| b.get(*f) != Some(t))
                        .map(|(f, t)| {
                            format!(
                                "field `{f}` ends as `{t}` and as `{}`",
                                b.get(f).map(|t| t.to_string()).unwrap_or_default()
                            )
                        })
                        .unwrap_or_else(|| "field environments differ".into());
                    return Err(TypeError::new(Code::BranchMismatch, format!("{what}: {diff}")));
                }
            }
        }
    }
    Ok(out)
}

impl Checker<'_> {
    /// Types one method body from `env`, returning the field environment
    /// after it.
    pub fn method_body(
        &self,
        view: &ClassView,
        this: ObjectId,
        method: &str,
        env: FieldTypeEnv,
    ) -> Result<FieldTypeEnv, TypeError> {
        let m = view.method(method).ok_or_else(|| {
            TypeError::new(Code::MethodNotUnderstood, format!("class `{}` has no method `{method}`", view.class))
        })?;
        let st = TypingState::for_method(this, view.class.clone(), env, (m.param_name.clone(), m.param_type.clone()));
        let out = self.expr(st, 0, &Omega::new(), &m.body)?;
        let st = match out {
            Outcome::Flows(t, st) => {
                if t != m.return_type {
                    return Err(TypeError::new(
                        Code::TypeMismatch,
                        format!("body has type `{t}` but `{method}` returns `{}`", m.return_type),
                    ));
                }
                st
            }
            Outcome::Jumps(at) => at,
        };
        if st.stack.len() != 1 || !st.objects.is_empty() {
            return Err(TypeError::new(Code::StackMismatch, "method body leaves the stack unbalanced"));
        }
        if let Some((x, t)) = &st.stack[0].param {
            if !terminated_type(t) {
                return Err(TypeError::new(
                    Code::ParameterMisused,
                    format!("parameter `{x}` still has linear type `{t}` at the end of `{method}`"),
                ));
            }
        }
        let mut st = st;
        Ok(st.lambda.remove(&this).map(|o| o.fields).unwrap_or_default())
    }

    /// The usage judgement, recording its derivation.
    pub fn usage(
        &self,
        view: &ClassView,
        this: ObjectId,
        usage: &Usage,
        env: FieldTypeEnv,
        theta: &BTreeMap<Name, FieldTypeEnv>,
    ) -> Result<(UsageResult, Derivation), UsageError> {
        let node = |rule, children| Derivation { rule, children };
        match usage.body() {
            UsageBody::End => Ok((UsageResult::Concrete(env), node(UsageRule::TCEn, vec![]))),
            UsageBody::Top => Err(TypeError::new(Code::StuckObject, "the top usage offers no way to finish").into()),
            UsageBody::Var(x) => match theta.get(x) {
                Some(saved) if *saved == env => Ok((UsageResult::Any, node(UsageRule::TCVar, vec![]))),
                Some(saved) => {
                    let diff = saved
                        .iter()
                        .find(|(f, t)| env.get(*f) != Some(t))
                        .map(|(f, t)| {
                            format!(
                                "field `{f}` is `{t}` on entry but `{}` on return",
                                env.get(f).map(|t| t.to_string()).unwrap_or_default()
                            )
                        })
                        .unwrap_or_default();
                    Err(TypeError::new(
                        Code::UsageRecursionMismatch,
                        format!("usage variable `{x}` is reached with different field types: {diff}"),
                    )
                    .into())
                }
                None => {
                    let rhs = usage.equations().get(x).ok_or_else(|| {
                        TypeError::new(Code::UnboundUsageVariable, format!("usage variable `{x}` is not bound"))
                    })?;
                    let mut theta = theta.clone();
                    theta.insert(x.clone(), env.clone());
                    let (r, d) = self.usage(view, this, &usage.with_body(rhs.clone()), env, &theta)?;
                    Ok((r, node(UsageRule::TCRec, vec![d])))
                }
            },
            UsageBody::Branch(entries) => {
                if entries.is_empty() {
                    return Err(
                        TypeError::new(Code::EmptyBranch, "a branch usage must offer at least one method").into()
                    );
                }
                let mut results = Vec::new();
                let mut children = Vec::new();
                for (m, w) in entries {
                    let after = self
                        .method_body(view, this, m, env.clone())
                        .map_err(|error| UsageError { error, method: Some(m.clone()) })?;
                    let (r, d) = self.usage(view, this, &usage.with_body(w.clone()), after, theta)?;
                    results.push(r);
                    children.push(d);
                }
                let r = join_results(results, "methods of one branch")?;
                Ok((r, node(UsageRule::TCBr, children)))
            }
            UsageBody::Choice(entries) => {
                if entries.is_empty() {
                    return Err(
                        TypeError::new(Code::EmptyBranch, "a choice usage must offer at least one label").into()
                    );
                }
                let mut results = Vec::new();
                let mut children = Vec::new();
                for u in entries.values() {
                    let (r, d) = self.usage(view, this, &usage.with_body(u.clone()), env.clone(), theta)?;
                    results.push(r);
                    children.push(d);
                }
                let r = join_results(results, "labels of one choice")?;
                Ok((r, node(UsageRule::TCCh, children)))
            }
        }
    }

    /// `∅; envT_F ⊢ C⟨t⟩[U] ▷ Γ'` with `terminated(Γ')`.
    pub fn usage_terminates(
        &self,
        view: &ClassView,
        usage: &Usage,
        env: FieldTypeEnv,
    ) -> Result<Derivation, UsageError> {
        let (result, d) = self.usage(view, THIS, usage, env, &BTreeMap::new())?;
        if let UsageResult::Concrete(env) = &result {
            if !terminated_field_env(env) {
                let open: Vec<String> =
                    env.iter().filter(|(_, t)| !terminated_type(t)).map(|(f, t)| format!("`{f}: {t}`")).collect();
                return Err(TypeError::new(
                    Code::NonTerminatedAfterUsage,
                    format!("after the usage completes, fields are still linear: {}", open.join(", ")),
                )
                .into());
            }
        }
        Ok(d)
    }
}

fn source_violation(e: &Expr) -> Option<&'static str> {
    if !returns_of(e).is_empty() {
        return Some("method bodies cannot contain `return`");
    }
    if !objects_of(e).is_empty() {
        return Some("method bodies cannot contain object references");
    }
    fn general_switch(e: &Expr) -> bool {
        if let Expr::Switch { receiver, method, scrutinee, .. } = e {
            if !matches!(scrutinee.as_ref(), Expr::Call(r, m, _) if r == receiver && m == method) {
                return true;
            }
        }
        e.children().into_iter().any(general_switch)
    }
    general_switch(e).then_some("switch scrutinee must call the switched method")
}

/// `TClass` / `TClassGen` for one declaration.
pub fn type_class_decl(checker: &Checker, decl: &ClassDecl) -> Result<Derivation, Diagnostic> {
    let at =
        |m: Option<&Name>| m.and_then(|m| decl.method(m)).map(|m| m.span.clone()).unwrap_or_else(|| decl.span.clone());
    for m in &decl.methods {
        if let Some(why) = source_violation(&m.body) {
            return Err(Diagnostic::error(
                Code::MalformedRuntimeExpression,
                m.span.clone(),
                format!("in `{}.{}`: {why}", decl.name, m.name),
            ));
        }
    }
    let class = match &decl.generic {
        Some(_) => ClassRef::generic(decl.name.clone(), Type::top()),
        None => ClassRef::plain(decl.name.clone()),
    };
    let view = checker.view(&class).map_err(|e| Diagnostic::error(e.code, decl.span.clone(), e.message))?;
    checker.usage_terminates(&view, &decl.usage, init_types(&view.fields)).map_err(|e| {
        let msg = match &e.method {
            Some(m) => format!("in `{}.{m}`: {}", decl.name, e.error.message),
            None => format!("class `{}`: {}", decl.name, e.error.message),
        };
        Diagnostic::error(e.error.code, at(e.method.as_ref()), msg)
    })
}

/// Checks one class by name.
pub fn type_class(program: &Program, name: &str) -> Result<Derivation, Diagnostic> {
    let decl = program.class(name).ok_or_else(|| {
        Diagnostic::error(Code::UndeclaredName, Default::default(), format!("class `{name}` is not declared"))
    })?;
    type_class_decl(&Checker::new(program), decl)
}

/// Result of checking every class of a program.
#[derive(Debug, Clone, Default)]
pub struct ProgramReport {
    pub derivations: BTreeMap<Name, Derivation>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProgramReport {
    pub fn accepted(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// `TProg`: every class is checked; the first error of each is reported.
pub fn type_program(program: &Program) -> ProgramReport {
    let checker = Checker::new(program);
    let mut report = ProgramReport::default();
    for decl in &program.classes {
        match type_class_decl(&checker, decl) {
            Ok(d) => {
                report.derivations.insert(decl.name.clone(), d);
            }
            Err(diag) => report.diagnostics.push(diag),
        }
    }
    sort_diagnostics(&mut report.diagnostics);
    report
}
