//! The behavioural type system: expression typing, class usage typing and
//! well-typed run-time configurations.

mod class;
mod config;
mod expr;
mod state;

pub use class::{type_class, type_class_decl, type_program, Derivation, ProgramReport, UsageResult, UsageRule, THIS};
pub use config::{get_type, reconstruct, well_typed_configuration, ConfigTyping, Premise, WtcViolation};
pub use expr::{Checker, Omega};
pub use state::{FrameTyping, ObjectTyping, Outcome, TypeError, TypingState};

#[cfg(test)]
mod tests;
