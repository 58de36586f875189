use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{ClassRef, Name, ObjectId, Type};
use crate::diagnostic::Code;
use crate::model::FieldTypeEnv;

/// `Λ(o)`: the class of an object and the current types of its fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectTyping {
    pub class: ClassRef,
    pub fields: FieldTypeEnv,
}

/// One level of `envT_S`: the active object and its parameter binding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameTyping {
    pub obj: ObjectId,
    pub param: Option<(Name, Type)>,
}

/// `Λ; envT_O · envT_S`. The stack is stored bottom first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TypingState {
    pub lambda: BTreeMap<ObjectId, ObjectTyping>,
    pub objects: BTreeMap<ObjectId, Type>,
    pub stack: Vec<FrameTyping>,
}

impl TypingState {
    /// State for checking a method body of the object `this`.
    pub fn for_method(this: ObjectId, class: ClassRef, fields: FieldTypeEnv, param: (Name, Type)) -> Self {
        TypingState {
            lambda: BTreeMap::from([(this, ObjectTyping { class, fields })]),
            objects: BTreeMap::new(),
            stack: vec![FrameTyping { obj: this, param: Some(param) }],
        }
    }

    /// A short description of the first place two states differ.
    pub fn difference(&self, other: &TypingState) -> String {
        for (o, a) in &self.lambda {
            match other.lambda.get(o) {
                Some(b) => {
                    for (f, ta) in &a.fields {
                        if let Some(tb) = b.fields.get(f) {
                            if ta != tb {
                                return format!("field `{f}` is `{ta}` on one path and `{tb}` on another");
                            }
                        }
                    }
                }
                None => return format!("object {o} is typed on only one path"),
            }
        }
        for (a, b) in self.stack.iter().zip(&other.stack) {
            if a.param != b.param {
                if let (Some((x, ta)), Some((_, tb))) = (&a.param, &b.param) {
                    return format!("parameter `{x}` is `{ta}` on one path and `{tb}` on another");
                }
            }
        }
        if self.objects != other.objects {
            return "the free objects differ between paths".into();
        }
        "the typing environments differ between paths".into()
    }
}

/// Result of typing an expression. `Jumps` marks an expression that always
/// ends in `continue`: its output environment is unconstrained, and `at` is
/// the environment at the jump, kept as a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Flows(Type, TypingState),
    Jumps(TypingState),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub code: Code,
    pub message: String,
}

impl TypeError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        TypeError { code, message: message.into() }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

impl std::error::Error for TypeError {}
