//! Small predicates shared by the checker and the interpreter: linearity,
//! field agreement, class information with generic substitution, initial
//! field values, and well-formedness of run-time expressions.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{
    ClassRef, Expr, FieldDecl, FieldType, GenericParam, MethodDecl, Name, ObjectId, Program, Type, Value,
};
use crate::usage::Usage;

/// Field name to type.
pub type FieldTypeEnv = BTreeMap<Name, Type>;
/// Field name to stored value.
pub type FieldEnv = BTreeMap<Name, Value>;

/// A type is linear iff it is a typestate whose usage is not `end`.
/// Generic variables are treated as linear: nothing is known about them.
pub fn lin_type(t: &Type) -> bool {
    match t {
        Type::Object(_, u) => !u.is_end(),
        Type::Var(_) => true,
        Type::Void | Type::Bool | Type::Enum(_) | Type::Bottom => false,
    }
}

pub fn terminated_type(t: &Type) -> bool {
    !lin_type(t)
}

pub fn terminated_field_env(env: &FieldTypeEnv) -> bool {
    env.values().all(terminated_type)
}

/// Compatibility of a declared field type with a value type; usages are
/// ignored.
pub fn agree(declared: &FieldType, actual: &Type) -> bool {
    match (declared, actual) {
        (FieldType::Void, Type::Void) | (FieldType::Bool, Type::Bool) => true,
        (FieldType::Enum(a), Type::Enum(b)) => a == b,
        (FieldType::Class(c), Type::Object(c2, _)) => c == c2,
        (FieldType::Class(_), Type::Bottom) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassInfoError {
    #[error("class `{0}` is not declared")]
    UnknownClass(Name),
    #[error("class `{0}` is generic and needs a type argument")]
    MissingArgument(Name),
    #[error("class `{0}` is not generic and takes no type argument")]
    UnexpectedArgument(Name),
}

/// Replaces the generic parameter `α[β]` of a class by an instantiation.
#[derive(Debug, Clone)]
pub struct Substitution<'a> {
    pub param: &'a GenericParam,
    pub with: &'a Type,
}

impl Substitution<'_> {
    pub fn ty(&self, t: &Type) -> Type {
        match t {
            Type::Var(p) if p == self.param => self.with.clone(),
            Type::Object(c, u) => Type::Object(self.class_ref(c), u.clone()),
            _ => t.clone(),
        }
    }

    pub fn class_ref(&self, c: &ClassRef) -> ClassRef {
        ClassRef { name: c.name.clone(), arg: c.arg.as_ref().map(|a| Box::new(self.ty(a))) }
    }

    pub fn field_type(&self, z: &FieldType) -> FieldType {
        match z {
            FieldType::Var(a) if *a == self.param.class_var => match self.with {
                Type::Object(c, _) => FieldType::Class(c.clone()),
                Type::Var(p) => FieldType::Var(p.class_var.clone()),
                _ => z.clone(),
            },
            FieldType::Class(c) => FieldType::Class(self.class_ref(c)),
            _ => z.clone(),
        }
    }

    pub fn expr(&self, e: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(self.expr(e));
        match e {
            Expr::NewGen(c, g) => Expr::NewGen(c.clone(), Box::new(self.ty(g))),
            Expr::Value(_) | Expr::Ref(_) | Expr::New(_) | Expr::Continue(_) => e.clone(),
            Expr::Assign(f, e) => Expr::Assign(f.clone(), sub(e)),
            Expr::Call(r, m, e) => Expr::Call(r.clone(), m.clone(), sub(e)),
            Expr::Seq(a, b) => Expr::Seq(sub(a), sub(b)),
            Expr::If(c, a, b) => Expr::If(sub(c), sub(a), sub(b)),
            Expr::Switch { receiver, method, scrutinee, branches } => Expr::Switch {
                receiver: receiver.clone(),
                method: method.clone(),
                scrutinee: sub(scrutinee),
                branches: branches.iter().map(|(l, e)| (l.clone(), self.expr(e))).collect(),
            },
            Expr::Label(k, e) => Expr::Label(k.clone(), sub(e)),
            Expr::Return(e) => Expr::Return(sub(e)),
        }
    }

    pub fn method(&self, m: &MethodDecl) -> MethodDecl {
        MethodDecl {
            name: m.name.clone(),
            param_name: m.param_name.clone(),
            param_type: self.ty(&m.param_type),
            return_type: self.ty(&m.return_type),
            body: self.expr(&m.body),
            span: m.span.clone(),
        }
    }
}

/// Methods, fields and usage of `C⟨t⟩` with the instantiation applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassView {
    pub class: ClassRef,
    pub methods: Vec<MethodDecl>,
    pub fields: Vec<FieldDecl>,
    pub usage: Usage,
}

impl ClassView {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn field_type(&self, name: &str) -> Option<&FieldType> {
        self.fields.iter().find(|f| f.name == name).map(|f| &f.ty)
    }
}

/// Signature of a method after instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub param_name: Name,
    pub param_type: Type,
    pub return_type: Type,
}

fn checked_decl<'p>(
    program: &'p Program,
    class: &ClassRef,
) -> Result<Option<&'p crate::ast::ClassDecl>, ClassInfoError> {
    if class.is_top() {
        return match class.arg {
            None => Ok(None),
            Some(_) => Err(ClassInfoError::UnexpectedArgument(class.name.clone())),
        };
    }
    let decl = program.class(&class.name).ok_or_else(|| ClassInfoError::UnknownClass(class.name.clone()))?;
    match (&decl.generic, &class.arg) {
        (Some(_), None) => Err(ClassInfoError::MissingArgument(class.name.clone())),
        (None, Some(_)) => Err(ClassInfoError::UnexpectedArgument(class.name.clone())),
        _ => Ok(Some(decl)),
    }
}

pub fn class_info(program: &Program, class: &ClassRef) -> Result<ClassView, ClassInfoError> {
    let Some(decl) = checked_decl(program, class)? else {
        return Ok(ClassView { class: class.clone(), methods: Vec::new(), fields: Vec::new(), usage: Usage::top() });
    };
    let (methods, fields) = match (&decl.generic, &class.arg) {
        (Some(param), Some(arg)) => {
            let s = Substitution { param, with: arg };
            (
                decl.methods.iter().map(|m| s.method(m)).collect(),
                decl.fields.iter().map(|f| FieldDecl { name: f.name.clone(), ty: s.field_type(&f.ty) }).collect(),
            )
        }
        _ => (decl.methods.clone(), decl.fields.clone()),
    };
    Ok(ClassView { class: class.clone(), methods, fields, usage: decl.usage.clone() })
}

/// Looks up one method signature without substituting bodies.
pub fn method_sig(program: &Program, class: &ClassRef, method: &str) -> Result<Option<MethodSig>, ClassInfoError> {
    let Some(decl) = checked_decl(program, class)? else {
        return Ok(None);
    };
    let Some(m) = decl.method(method) else {
        return Ok(None);
    };
    let sig = match (&decl.generic, &class.arg) {
        (Some(param), Some(arg)) => {
            let s = Substitution { param, with: arg };
            MethodSig {
                param_name: m.param_name.clone(),
                param_type: s.ty(&m.param_type),
                return_type: s.ty(&m.return_type),
            }
        }
        _ => MethodSig {
            param_name: m.param_name.clone(),
            param_type: m.param_type.clone(),
            return_type: m.return_type.clone(),
        },
    };
    Ok(Some(sig))
}

/// Initial usage of instances of `class`.
pub fn class_usage(program: &Program, class: &ClassRef) -> Result<Usage, ClassInfoError> {
    Ok(match checked_decl(program, class)? {
        Some(decl) => decl.usage.clone(),
        None => Usage::top(),
    })
}

/// `null` for objects, `false` for booleans, `unit` for void.
pub fn init_vals(fields: &[FieldDecl]) -> FieldEnv {
    fields
        .iter()
        .map(|f| {
            let v = match f.ty {
                FieldType::Void => Value::Unit,
                FieldType::Bool => Value::False,
                FieldType::Class(_) | FieldType::Var(_) | FieldType::Enum(_) => Value::Null,
            };
            (f.name.clone(), v)
        })
        .collect()
}

/// `⊥` for objects, `bool` for booleans, `void` for void.
pub fn init_types(fields: &[FieldDecl]) -> FieldTypeEnv {
    fields
        .iter()
        .map(|f| {
            let t = match f.ty {
                FieldType::Void => Type::Void,
                FieldType::Bool => Type::Bool,
                FieldType::Class(_) | FieldType::Var(_) | FieldType::Enum(_) => Type::Bottom,
            };
            (f.name.clone(), t)
        })
        .collect()
}

/// All `return{..}` subexpressions, outermost first.
pub fn returns_of(e: &Expr) -> Vec<&Expr> {
    fn go<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
        if let Expr::Return(_) = e {
            out.push(e);
        }
        for c in e.children() {
            go(c, out);
        }
    }
    let mut out = Vec::new();
    go(e, &mut out);
    out
}

/// Multiset of object identities occurring in `e`.
pub fn objects_of(e: &Expr) -> Vec<ObjectId> {
    fn go(e: &Expr, out: &mut Vec<ObjectId>) {
        if let Expr::Value(Value::Object(o)) = e {
            out.push(*o);
        }
        for c in e.children() {
            go(c, out);
        }
    }
    let mut out = Vec::new();
    go(e, &mut out);
    out
}

fn is_set(objs: &[ObjectId]) -> bool {
    let mut seen = BTreeSet::new();
    objs.iter().all(|o| seen.insert(*o))
}

fn sorted(mut v: Vec<ObjectId>) -> Vec<ObjectId> {
    v.sort();
    v
}

/// Reasons an expression violates the well-formedness conditions; empty
/// when it is well formed.
pub fn expression_violations(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    fn positions(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Seq(_, b) if !returns_of(b).is_empty() => {
                out.push("return inside the right operand of a sequence".into())
            }
            Expr::If(_, a, b) if !returns_of(a).is_empty() || !returns_of(b).is_empty() => {
                out.push("return inside a conditional branch".into())
            }
            Expr::Switch { branches, .. } if branches.values().any(|b| !returns_of(b).is_empty()) => {
                out.push("return inside a switch branch".into())
            }
            _ => {}
        }
        for c in e.children() {
            positions(c, out);
        }
    }
    positions(e, &mut out);

    let objs = objects_of(e);
    if !is_set(&objs) {
        out.push("an object occurs more than once".into());
    }
    let rets = returns_of(e);
    if !rets.is_empty() {
        let innermost: Vec<&Expr> = rets
            .iter()
            .copied()
            .filter(|r| match r {
                Expr::Return(body) => returns_of(body).is_empty(),
                _ => false,
            })
            .collect();
        match innermost.as_slice() {
            [Expr::Return(body)] => {
                if sorted(objects_of(body)) != sorted(objs) {
                    out.push("objects occur outside the innermost return".into());
                }
            }
            _ => out.push("returns do not form a single nested chain".into()),
        }
    }
    out
}

pub fn well_formed_expression(e: &Expr) -> bool {
    expression_violations(e).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::usage::UsageBody;

    fn file() -> ClassRef {
        ClassRef::plain("File")
    }

    fn open_usage() -> Usage {
        Usage::simple(UsageBody::branch([("open", UsageBody::End)]))
    }

    #[test]
    fn linearity() {
        assert!(lin_type(&Type::Object(file(), open_usage())));
        assert!(!lin_type(&Type::Bool));
        assert!(!lin_type(&Type::Object(file(), Usage::end())));
        assert!(lin_type(&Type::top()));
        assert!(terminated_type(&Type::Bottom));
        let env = FieldTypeEnv::from([(
            "file".to_string(),
            Type::Object(file(), Usage::simple(UsageBody::branch([("close", UsageBody::End)]))),
        )]);
        assert!(!terminated_field_env(&env));
        assert!(terminated_field_env(&FieldTypeEnv::new()));
    }

    #[test]
    fn agreement_axioms() {
        assert!(agree(&FieldType::Bool, &Type::Bool));
        assert!(agree(&FieldType::Class(file()), &Type::Object(file(), open_usage())));
        assert!(!agree(&FieldType::Bool, &Type::Void));
        assert!(agree(&FieldType::Class(file()), &Type::Bottom));
        assert!(!agree(&FieldType::Class(file()), &Type::Object(ClassRef::plain("Other"), Usage::end())));
        let gen = ClassRef::generic("Id", Type::Object(ClassRef::plain("B"), Usage::end()));
        assert!(agree(&FieldType::Class(gen.clone()), &Type::Object(gen, open_usage())));
    }

    #[test]
    fn initial_fields() {
        let fields = vec![
            FieldDecl { name: "file".into(), ty: FieldType::Class(file()) },
            FieldDecl { name: "flag".into(), ty: FieldType::Bool },
            FieldDecl { name: "nothing".into(), ty: FieldType::Void },
        ];
        assert_eq!(init_vals(&fields)["file"], Value::Null);
        assert_eq!(init_vals(&fields)["flag"], Value::False);
        assert_eq!(init_vals(&fields)["nothing"], Value::Unit);
        assert_eq!(init_types(&fields)["file"], Type::Bottom);
        assert_eq!(init_types(&fields)["flag"], Type::Bool);
        assert!(init_vals(&[]).is_empty());
    }

    #[test]
    fn occurrences() {
        let e = Expr::seq(
            Expr::obj(ObjectId(1)),
            Expr::call(crate::ast::Ref::Field("f".into()), "m", Expr::obj(ObjectId(2))),
        );
        assert_eq!(objects_of(&e), vec![ObjectId(1), ObjectId(2)]);
        assert_eq!(returns_of(&Expr::Return(Box::new(Expr::unit()))).len(), 1);
    }

    #[test]
    fn well_formedness_clauses() {
        assert!(well_formed_expression(&Expr::unit()));
        let bad = Expr::If(
            Box::new(Expr::Value(Value::True)),
            Box::new(Expr::Return(Box::new(Expr::unit()))),
            Box::new(Expr::unit()),
        );
        assert!(!well_formed_expression(&bad));
        let dup = Expr::seq(Expr::obj(ObjectId(1)), Expr::obj(ObjectId(1)));
        assert!(!well_formed_expression(&dup));
        // objects outside the innermost return
        let outside = Expr::Call(
            crate::ast::Ref::Field("f".into()),
            "m".into(),
            Box::new(Expr::seq(Expr::Return(Box::new(Expr::unit())), Expr::obj(ObjectId(3)))),
        );
        assert!(!well_formed_expression(&outside));
        let nested = Expr::Return(Box::new(Expr::assign("f", Expr::Return(Box::new(Expr::obj(ObjectId(4)))))));
        assert!(well_formed_expression(&nested));
    }
}
