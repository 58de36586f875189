//! Generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mungo::ast::{
    ClassDecl, ClassRef, EnumDecl, Expr, FieldDecl, FieldType, GenericParam, MethodDecl, Name, Program, Ref, Type,
    Value,
};
use mungo::usage::{Usage, UsageBody};
use proptest::prelude::*;
use proptest::sample::select;

pub const METHODS: &[&str] = &["m0", "m1", "m2", "m3"];
pub const FIELDS: &[&str] = &["f0", "f1", "f2"];
pub const PARAM: &str = "y";

fn names(prefix: &str, n: usize) -> Vec<Name> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// `u` positions: a non-empty branch, `end`, or one of `vars`.
fn usage_u(methods: Vec<Name>, labels: Vec<Name>, vars: Vec<Name>, depth: u32) -> BoxedStrategy<UsageBody> {
    let mut leaves: Vec<BoxedStrategy<UsageBody>> = vec![Just(UsageBody::End).boxed()];
    if !vars.is_empty() {
        leaves.push(select(vars.clone()).prop_map(UsageBody::Var).boxed());
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let branch = usage_branch(methods, labels, vars, depth);
    prop_oneof![1 => leaf, 2 => branch].boxed()
}

fn usage_branch(methods: Vec<Name>, labels: Vec<Name>, vars: Vec<Name>, depth: u32) -> BoxedStrategy<UsageBody> {
    let w = usage_w(methods.clone(), labels, vars, depth.saturating_sub(1));
    proptest::collection::btree_map(select(methods), w, 1..=2).prop_map(UsageBody::Branch).boxed()
}

/// `w` positions: a `u` or a choice over some labels.
fn usage_w(methods: Vec<Name>, labels: Vec<Name>, vars: Vec<Name>, depth: u32) -> BoxedStrategy<UsageBody> {
    let u = usage_u(methods.clone(), labels.clone(), vars.clone(), depth);
    if labels.is_empty() || depth == 0 {
        return u;
    }
    let inner = usage_u(methods, labels.clone(), vars, depth - 1);
    let choice = proptest::collection::btree_map(select(labels), inner, 1..=2).prop_map(UsageBody::Choice);
    prop_oneof![3 => u, 1 => choice].boxed()
}

/// A usage whose equations are all branches, so every variable unfolds in
/// one step.
pub fn arb_usage(methods: Vec<Name>, labels: Vec<Name>) -> BoxedStrategy<Usage> {
    (0usize..=3)
        .prop_flat_map(move |n| {
            let vars = names("X", n);
            let eqs: Vec<_> =
                vars.iter().map(|_| usage_branch(methods.clone(), labels.clone(), vars.clone(), 2)).collect();
            (usage_u(methods.clone(), labels.clone(), vars.clone(), 3), eqs, Just(vars))
        })
        .prop_map(|(body, eqs, vars)| {
            let equations: BTreeMap<Name, UsageBody> = vars.into_iter().zip(eqs).collect();
            Usage::checked(body, equations).expect("generated usages are closed and productive")
        })
        .boxed()
}

/// A closed, productive usage together with its full equation set, where
/// equations may also alias other variables as long as no cycle of aliases
/// forms. Used for unfolding properties.
pub fn arb_productive_usage() -> BoxedStrategy<(UsageBody, BTreeMap<Name, UsageBody>)> {
    let methods: Vec<Name> = METHODS.iter().map(|s| s.to_string()).collect();
    let labels: Vec<Name> = vec!["YES".into(), "NO".into()];
    (1usize..=4)
        .prop_flat_map(move |n| {
            let vars = names("X", n);
            let rhs: Vec<BoxedStrategy<UsageBody>> = (0..n)
                .map(|i| {
                    let branch = usage_branch(methods.clone(), labels.clone(), vars.clone(), 2);
                    let later: Vec<Name> = vars[i + 1..].to_vec();
                    if later.is_empty() {
                        branch
                    } else {
                        prop_oneof![3 => branch, 1 => select(later).prop_map(UsageBody::Var)].boxed()
                    }
                })
                .collect();
            (usage_u(methods.clone(), labels.clone(), vars.clone(), 2), rhs, Just(vars))
        })
        .prop_map(|(body, rhs, vars)| (body, vars.into_iter().zip(rhs).collect()))
        .boxed()
}

#[derive(Debug, Clone)]
struct Scope {
    labels: Vec<Name>,
    classes: Vec<(Name, bool)>,
    generic: Option<GenericParam>,
}

fn arb_type(scope: &Scope, usage_labels: Vec<Name>, enums: Vec<Name>) -> BoxedStrategy<Type> {
    let mut options: Vec<BoxedStrategy<Type>> = vec![Just(Type::Void).boxed(), Just(Type::Bool).boxed()];
    if !enums.is_empty() {
        options.push(select(enums).prop_map(Type::Enum).boxed());
    }
    let methods: Vec<Name> = METHODS.iter().map(|s| s.to_string()).collect();
    let plain: Vec<Name> = scope.classes.iter().filter(|(_, g)| !g).map(|(n, _)| n.clone()).collect();
    if !plain.is_empty() {
        options.push(
            (select(plain), arb_usage(methods, usage_labels))
                .prop_map(|(c, u)| Type::Object(ClassRef::plain(c), u))
                .boxed(),
        );
    }
    if let Some(g) = &scope.generic {
        options.push(Just(Type::Var(g.clone())).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

fn arb_typestate(scope: &Scope) -> BoxedStrategy<Type> {
    let methods: Vec<Name> = METHODS.iter().map(|s| s.to_string()).collect();
    let plain: Vec<Name> = scope.classes.iter().filter(|(_, g)| !g).map(|(n, _)| n.clone()).collect();
    let mut options: Vec<BoxedStrategy<Type>> = vec![(select(plain), arb_usage(methods, scope.labels.clone()))
        .prop_map(|(c, u)| Type::Object(ClassRef::plain(c), u))
        .boxed()];
    if let Some(g) = &scope.generic {
        options.push(Just(Type::Var(g.clone())).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

fn arb_ref() -> BoxedStrategy<Ref> {
    prop_oneof![
        1 => Just(Ref::Param(PARAM.to_string())),
        2 => select(FIELDS).prop_map(|f| Ref::Field(f.to_string())),
    ]
    .boxed()
}

/// Loop labels are generated as placeholders and resolved by `fix_loops`.
fn arb_expr(scope: &Scope) -> BoxedStrategy<Expr> {
    let labels = scope.labels.clone();
    let classes = scope.classes.clone();
    let gen_arg = arb_typestate(scope);
    let mut leaves: Vec<BoxedStrategy<Expr>> = vec![
        select(vec![Value::Unit, Value::True, Value::False, Value::Null]).prop_map(Expr::Value).boxed(),
        arb_ref().prop_map(Expr::Ref).boxed(),
        (0usize..4).prop_map(|i| Expr::Continue(format!("#{i}"))).boxed(),
    ];
    if !labels.is_empty() {
        leaves.push(select(labels.clone()).prop_map(|l| Expr::Value(Value::Label(l))).boxed());
    }
    let plain: Vec<Name> = classes.iter().filter(|(_, g)| !g).map(|(n, _)| n.clone()).collect();
    let generic: Vec<Name> = classes.iter().filter(|(_, g)| *g).map(|(n, _)| n.clone()).collect();
    if !plain.is_empty() {
        leaves.push(select(plain).prop_map(Expr::New).boxed());
    }
    if !generic.is_empty() {
        leaves.push((select(generic), gen_arg).prop_map(|(c, t)| Expr::NewGen(c, Box::new(t))).boxed());
    }
    let leaf = proptest::strategy::Union::new(leaves);
    leaf.prop_recursive(4, 24, 3, move |inner| {
        let labels = labels.clone();
        let mut options: Vec<BoxedStrategy<Expr>> = vec![
            (select(FIELDS), inner.clone()).prop_map(|(f, e)| Expr::assign(f, e)).boxed(),
            (arb_ref(), select(METHODS), inner.clone()).prop_map(|(r, m, e)| Expr::call(r, m, e)).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::seq(a, b)).boxed(),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, a, b)| Expr::If(Box::new(c), Box::new(a), Box::new(b)))
                .boxed(),
            inner.clone().prop_map(|e| Expr::Label("#".into(), Box::new(e))).boxed(),
        ];
        if !labels.is_empty() {
            let branches = proptest::collection::btree_map(select(labels), inner.clone(), 1..=2);
            options.push(
                (arb_ref(), select(METHODS), inner.clone(), branches)
                    .prop_map(|(r, m, arg, branches)| Expr::Switch {
                        receiver: r.clone(),
                        method: m.to_string(),
                        scrutinee: Box::new(Expr::call(r, m, arg)),
                        branches,
                    })
                    .boxed(),
            );
        }
        proptest::strategy::Union::new(options)
    })
    .boxed()
}

/// Names loops `k0, k1, ...` in order and binds each placeholder
/// `continue` to an enclosing loop, or replaces it by `unit`.
fn fix_loops(e: &Expr, scope: &mut Vec<Name>, next: &mut usize) -> Expr {
    let go = |e: &Expr, scope: &mut Vec<Name>, next: &mut usize| Box::new(fix_loops(e, scope, next));
    match e {
        Expr::Label(_, body) => {
            let k = format!("k{next}");
            *next += 1;
            scope.push(k.clone());
            let body = go(body, scope, next);
            scope.pop();
            Expr::Label(k, body)
        }
        Expr::Continue(placeholder) => {
            let i: usize = placeholder.trim_start_matches('#').parse().unwrap_or(0);
            if scope.is_empty() {
                Expr::unit()
            } else {
                Expr::Continue(scope[i % scope.len()].clone())
            }
        }
        Expr::Value(_) | Expr::Ref(_) | Expr::New(_) | Expr::NewGen(..) => e.clone(),
        Expr::Assign(f, rhs) => Expr::Assign(f.clone(), go(rhs, scope, next)),
        Expr::Call(r, m, arg) => Expr::Call(r.clone(), m.clone(), go(arg, scope, next)),
        Expr::Seq(a, b) => {
            let a = go(a, scope, next);
            Expr::Seq(a, go(b, scope, next))
        }
        Expr::If(c, a, b) => {
            let c = go(c, scope, next);
            let a = go(a, scope, next);
            Expr::If(c, a, go(b, scope, next))
        }
        Expr::Switch { receiver, method, scrutinee, branches } => {
            let scrutinee = go(scrutinee, scope, next);
            let branches = branches.iter().map(|(l, b)| (l.clone(), *go(b, scope, next))).collect();
            Expr::Switch { receiver: receiver.clone(), method: method.clone(), scrutinee, branches }
        }
        Expr::Return(body) => Expr::Return(go(body, scope, next)),
    }
}

fn arb_method(scope: &Scope, name: Name, enums: Vec<Name>) -> BoxedStrategy<MethodDecl> {
    (
        arb_type(scope, scope.labels.clone(), enums.clone()),
        arb_type(scope, scope.labels.clone(), enums),
        arb_expr(scope),
    )
        .prop_map(move |(param_type, return_type, body)| MethodDecl {
            name: name.clone(),
            param_name: PARAM.to_string(),
            param_type,
            return_type,
            body: fix_loops(&body, &mut Vec::new(), &mut 0),
            span: Default::default(),
        })
        .boxed()
}

fn arb_field_type(scope: &Scope) -> BoxedStrategy<FieldType> {
    let plain: Vec<Name> = scope.classes.iter().filter(|(_, g)| !g).map(|(n, _)| n.clone()).collect();
    let generic: Vec<Name> = scope.classes.iter().filter(|(_, g)| *g).map(|(n, _)| n.clone()).collect();
    let mut options: Vec<BoxedStrategy<FieldType>> = vec![Just(FieldType::Void).boxed(), Just(FieldType::Bool).boxed()];
    options.push(select(plain).prop_map(|c| FieldType::Class(ClassRef::plain(c))).boxed());
    if !generic.is_empty() {
        let arg = arb_typestate(&Scope { generic: None, ..scope.clone() });
        options.push((select(generic), arg).prop_map(|(c, t)| FieldType::Class(ClassRef::generic(c, t))).boxed());
    }
    if let Some(g) = &scope.generic {
        options.push(Just(FieldType::Var(g.class_var.clone())).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

fn arb_class(scope: Scope, name: Name, enums: Vec<Name>) -> BoxedStrategy<ClassDecl> {
    let methods: Vec<Name> = METHODS.iter().map(|s| s.to_string()).collect();
    let generic = scope.generic.clone();
    (
        arb_usage(methods.clone(), scope.labels.clone()),
        proptest::collection::btree_map(select(FIELDS), arb_field_type(&scope), 0..=2),
        proptest::sample::subsequence(methods, 1..=3),
    )
        .prop_flat_map(move |(usage, fields, method_names)| {
            let ms: Vec<_> = method_names.into_iter().map(|m| arb_method(&scope, m, enums.clone())).collect();
            (Just(usage), Just(fields), ms)
        })
        .prop_map(move |(usage, fields, methods)| ClassDecl {
            name: name.clone(),
            generic: generic.clone(),
            usage,
            fields: fields.into_iter().map(|(f, ty)| FieldDecl { name: f.to_string(), ty }).collect(),
            methods,
            span: Default::default(),
        })
        .boxed()
}

/// Syntactically valid programs: one or two enums, a plain class `C0`, a
/// generic class `C1<A[b]>` and a conforming `Main`.
pub fn arb_program() -> BoxedStrategy<Program> {
    proptest::collection::vec(1usize..=3, 1..=2)
        .prop_flat_map(|sizes| {
            let enums: Vec<EnumDecl> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| EnumDecl {
                    name: format!("E{i}"),
                    labels: (0..n).map(|j| format!("L{i}x{j}")).collect(),
                    span: Default::default(),
                })
                .collect();
            let labels: Vec<Name> = enums.iter().flat_map(|e| e.labels.clone()).collect();
            let enum_names: Vec<Name> = enums.iter().map(|e| e.name.clone()).collect();
            let classes = vec![("C0".to_string(), false), ("C1".to_string(), true), ("Main".to_string(), false)];
            let plain = Scope { labels: labels.clone(), classes: classes.clone(), generic: None };
            let gen =
                Scope { generic: Some(GenericParam { class_var: "A".into(), usage_var: "b".into() }), ..plain.clone() };
            let main_body = arb_expr(&plain).prop_map(|e| fix_loops(&e, &mut Vec::new(), &mut 0));
            (
                Just(enums),
                arb_class(plain.clone(), "C0".into(), enum_names.clone()),
                arb_class(gen, "C1".into(), enum_names),
                main_body,
            )
        })
        .prop_map(|(enums, c0, c1, body)| {
            let main = ClassDecl {
                name: "Main".into(),
                generic: None,
                usage: Usage::simple(UsageBody::branch([("main", UsageBody::End)])),
                fields: vec![FieldDecl { name: "f0".into(), ty: FieldType::Class(ClassRef::plain("C0")) }],
                methods: vec![MethodDecl {
                    name: "main".into(),
                    param_name: PARAM.into(),
                    param_type: Type::Void,
                    return_type: Type::Void,
                    body,
                    span: Default::default(),
                }],
                span: Default::default(),
            };
            Program { enums, classes: vec![c0, c1, main] }
        })
        .boxed()
}
