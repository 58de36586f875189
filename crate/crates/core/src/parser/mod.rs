//! Surface syntax: tokenizer, recursive descent parser and printer.

mod lexer;
#[allow(clippy::module_inception)]
mod parser;
mod printer;

pub use lexer::is_keyword;
pub use parser::{parse_program, IMPLICIT_PARAM};
pub use printer::{expr_to_line, print_program};
