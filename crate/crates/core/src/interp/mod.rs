//! Small-step interpreter over configurations `⟨h, env_S, e⟩`.

mod run;
mod step;
mod wf;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{ClassRef, Expr, Name, ObjectId, Program, Value};
use crate::model::{class_info, init_vals, ClassInfoError, FieldEnv};
use crate::usage::Usage;

pub use run::{digest, run, RunOptions, RunOutcome, RunResult, TraceEntry, DEFAULT_MAX_STEPS};
pub use step::{step, Rule, StepResult, StuckReason};
pub use wf::{linearity_violations, well_formed_configuration};

/// `h(o) = ⟨C⟨t⟩[W], env_F⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeapObject {
    pub class: ClassRef,
    pub usage: Usage,
    pub fields: FieldEnv,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Heap {
    pub objects: BTreeMap<ObjectId, HeapObject>,
    next: u32,
}

impl Heap {
    /// Allocates the next identity in sequence.
    pub fn alloc(&mut self, obj: HeapObject) -> ObjectId {
        let id = ObjectId(self.next);
        self.next += 1;
        self.objects.insert(id, obj);
        id
    }

    /// Inserts an object under a chosen identity, for hand-built
    /// configurations.
    pub fn insert(&mut self, id: ObjectId, obj: HeapObject) {
        self.next = self.next.max(id.0 + 1);
        self.objects.insert(id, obj);
    }

    pub fn get(&self, id: ObjectId) -> Option<&HeapObject> {
        self.objects.get(&id)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut HeapObject> {
        self.objects.get_mut(&id)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// A value is linear if it is an object whose usage has not reached
    /// `end`.
    pub fn is_linear(&self, v: &Value) -> bool {
        match v {
            Value::Object(o) => self.get(*o).is_some_and(|h| !h.usage.is_end()),
            _ => false,
        }
    }
}

/// One level of `env_S`: the active object and its parameter binding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub obj: ObjectId,
    pub param: (Name, Value),
}

/// `⟨h, env_S, e⟩`. The stack is stored bottom first, so the last frame is
/// the one the next ground step uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub heap: Heap,
    pub stack: Vec<Frame>,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("the program has no class `Main`")]
    MissingMain,
    #[error("class `Main` has no method `main`")]
    MissingMainMethod,
    #[error(transparent)]
    Class(#[from] ClassInfoError),
}

/// The configuration right after `main` was invoked on a fresh `Main`.
pub fn initial_configuration(program: &Program) -> Result<Configuration, InitError> {
    program.class("Main").ok_or(InitError::MissingMain)?;
    let view = class_info(program, &ClassRef::plain("Main"))?;
    let main = view.method("main").ok_or(InitError::MissingMainMethod)?;
    let mut heap = Heap::default();
    let o =
        heap.alloc(HeapObject { class: ClassRef::plain("Main"), usage: Usage::end(), fields: init_vals(&view.fields) });
    Ok(Configuration {
        heap,
        stack: vec![Frame { obj: o, param: (main.param_name.clone(), Value::Unit) }],
        expr: main.body.clone(),
    })
}

impl fmt::Display for HeapObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {{", self.class, self.usage)?;
        for (i, (name, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {name} = {v}")?;
        }
        write!(f, " }}")
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "heap:")?;
        for (o, obj) in &self.heap.objects {
            writeln!(f, "  {o} = {obj}")?;
        }
        write!(f, "stack:")?;
        for frame in self.stack.iter().rev() {
            write!(f, " ({}, [{} = {}])", frame.obj, frame.param.0, frame.param.1)?;
        }
        writeln!(f)?;
        write!(f, "expr: {}", self.expr)
    }
}
