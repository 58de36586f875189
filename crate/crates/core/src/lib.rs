//! Behavioural type checking and execution for Mungo, a small
//! object-oriented language whose classes carry typestate usages.

pub mod ast;
pub mod diagnostic;
pub mod harness;
pub mod interp;
pub mod lts;
pub mod model;
pub mod monitor;
pub mod parser;
pub mod typeck;
pub mod usage;
