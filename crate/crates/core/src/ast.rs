//! Abstract syntax of Mungo programs, including the run-time expression forms
//! produced by the interpreter.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::diagnostic::Span;
use crate::usage::Usage;

pub type Name = String;

/// Reserved name of the top class used to check generic classes.
pub const TOP_CLASS: &str = "⊤";

/// A whole program: enum declarations followed by class declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub enums: Vec<EnumDecl>,
    pub classes: Vec<ClassDecl>,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn enum_decl(&self, name: &str) -> Option<&EnumDecl> {
        self.enums.iter().find(|e| e.name == name)
    }

    /// The enum declaring `label`, if any. Labels are globally unique.
    pub fn enum_of_label(&self, label: &str) -> Option<&EnumDecl> {
        self.enums.iter().find(|e| e.labels.iter().any(|l| l == label))
    }
}

#[derive(Debug, Clone, Eq)]
pub struct EnumDecl {
    pub name: Name,
    pub labels: Vec<Name>,
    pub span: Span,
}

impl PartialEq for EnumDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.labels == other.labels
    }
}

/// Generic parameter `α[β]`: a class variable paired with a usage variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GenericParam {
    pub class_var: Name,
    pub usage_var: Name,
}

#[derive(Debug, Clone, Eq)]
pub struct ClassDecl {
    pub name: Name,
    pub generic: Option<GenericParam>,
    pub usage: Usage,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub span: Span,
}

impl PartialEq for ClassDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.generic == other.generic
            && self.usage == other.usage
            && self.fields == other.fields
            && self.methods == other.methods
    }
}

impl ClassDecl {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: Name,
    pub ty: FieldType,
}

#[derive(Debug, Clone, Eq)]
pub struct MethodDecl {
    pub name: Name,
    pub param_name: Name,
    pub param_type: Type,
    pub return_type: Type,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for MethodDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.param_name == other.param_name
            && self.param_type == other.param_type
            && self.return_type == other.return_type
            && self.body == other.body
    }
}

/// A class together with its type argument, `C⟨t⟩`. A missing argument is
/// the `⊥` argument of a non-generic class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassRef {
    pub name: Name,
    pub arg: Option<Box<Type>>,
}

impl ClassRef {
    pub fn plain(name: impl Into<Name>) -> Self {
        ClassRef { name: name.into(), arg: None }
    }

    pub fn generic(name: impl Into<Name>, arg: Type) -> Self {
        ClassRef { name: name.into(), arg: Some(Box::new(arg)) }
    }

    pub fn top() -> Self {
        ClassRef::plain(TOP_CLASS)
    }

    pub fn is_top(&self) -> bool {
        self.name == TOP_CLASS
    }
}

/// Declared type of a field: a base type, a class without usage, or the
/// class variable of the enclosing generic class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldType {
    Void,
    Bool,
    Enum(Name),
    Class(ClassRef),
    Var(Name),
}

/// Types of expressions, parameters and method results.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Void,
    Bool,
    Enum(Name),
    /// Typestate `C⟨t⟩[U]`.
    Object(ClassRef, Usage),
    /// Generic variable `α[β]`.
    Var(GenericParam),
    /// The type of `null`.
    Bottom,
}

impl Type {
    pub fn object(class: ClassRef, usage: Usage) -> Self {
        Type::Object(class, usage)
    }

    /// `⊤_C⟨⊥⟩[⊤_U]`, the instantiation used to check generic classes.
    pub fn top() -> Self {
        Type::Object(ClassRef::top(), Usage::top())
    }

    pub fn usage(&self) -> Option<&Usage> {
        match self {
            Type::Object(_, u) => Some(u),
            _ => None,
        }
    }
}

/// Identity of a heap object. Minted in allocation order as `o0, o1, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    True,
    False,
    Label(Name),
    Null,
    Object(ObjectId),
}

impl Value {
    pub fn bool(b: bool) -> Self {
        if b {
            Value::True
        } else {
            Value::False
        }
    }
}

/// A reference: a method parameter `x` or a field `f` of the active object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ref {
    Param(Name),
    Field(Name),
}

impl Ref {
    pub fn name(&self) -> &str {
        match self {
            Ref::Param(n) | Ref::Field(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Value(Value),
    Ref(Ref),
    New(Name),
    /// `new C⟨g⟩`; the argument is a typestate or a generic variable.
    NewGen(Name, Box<Type>),
    Assign(Name, Box<Expr>),
    Call(Ref, Name, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `switch_{r.m}(e) {l_i: e_i}`. In source the scrutinee is `r.m(e')`.
    Switch {
        receiver: Ref,
        method: Name,
        scrutinee: Box<Expr>,
        branches: BTreeMap<Name, Expr>,
    },
    Label(Name, Box<Expr>),
    Continue(Name),
    /// Run-time only: an executing method body.
    Return(Box<Expr>),
}

impl Expr {
    pub fn unit() -> Self {
        Expr::Value(Value::Unit)
    }

    pub fn obj(id: ObjectId) -> Self {
        Expr::Value(Value::Object(id))
    }

    pub fn seq(a: Expr, b: Expr) -> Self {
        Expr::Seq(Box::new(a), Box::new(b))
    }

    pub fn call(r: Ref, m: impl Into<Name>, arg: Expr) -> Self {
        Expr::Call(r, m.into(), Box::new(arg))
    }

    pub fn assign(f: impl Into<Name>, e: Expr) -> Self {
        Expr::Assign(f.into(), Box::new(e))
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Expr::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Constructor name used in traces and error excerpts.
    pub fn head(&self) -> &'static str {
        match self {
            Expr::Value(_) => "value",
            Expr::Ref(_) => "ref",
            Expr::New(_) => "new",
            Expr::NewGen(..) => "new-gen",
            Expr::Assign(..) => "assign",
            Expr::Call(..) => "call",
            Expr::Seq(..) => "seq",
            Expr::If(..) => "if",
            Expr::Switch { .. } => "switch",
            Expr::Label(..) => "label",
            Expr::Continue(_) => "continue",
            Expr::Return(_) => "return",
        }
    }

    /// Immediate subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Value(_) | Expr::Ref(_) | Expr::New(_) | Expr::NewGen(..) | Expr::Continue(_) => {
                vec![]
            }
            Expr::Assign(_, e) | Expr::Call(_, _, e) | Expr::Label(_, e) | Expr::Return(e) => {
                vec![e]
            }
            Expr::Seq(a, b) => vec![a, b],
            Expr::If(c, a, b) => vec![c, a, b],
            Expr::Switch { scrutinee, branches, .. } => {
                let mut out: Vec<&Expr> = vec![scrutinee];
                out.extend(branches.values());
                out
            }
        }
    }

    /// Replaces every free `continue k` by `replacement`.
    pub fn substitute_continue(&self, k: &str, replacement: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute_continue(k, replacement));
        match self {
            Expr::Continue(k2) if k2 == k => replacement.clone(),
            Expr::Label(k2, _) if k2 == k => self.clone(),
            Expr::Value(_) | Expr::Ref(_) | Expr::New(_) | Expr::NewGen(..) | Expr::Continue(_) => self.clone(),
            Expr::Assign(f, e) => Expr::Assign(f.clone(), sub(e)),
            Expr::Call(r, m, e) => Expr::Call(r.clone(), m.clone(), sub(e)),
            Expr::Seq(a, b) => Expr::Seq(sub(a), sub(b)),
            Expr::If(c, a, b) => Expr::If(sub(c), sub(a), sub(b)),
            Expr::Switch { receiver, method, scrutinee, branches } => Expr::Switch {
                receiver: receiver.clone(),
                method: method.clone(),
                scrutinee: sub(scrutinee),
                branches: branches.iter().map(|(l, e)| (l.clone(), e.substitute_continue(k, replacement))).collect(),
            },
            Expr::Label(k2, e) => Expr::Label(k2.clone(), sub(e)),
            Expr::Return(e) => Expr::Return(sub(e)),
        }
    }
}
