//! Prints the class usage derivation of every class in a program.

use mungo::parser::parse_program;
use mungo::typeck::type_program;

const FILEREADER: &str = include_str!("../corpus/filereader.mungo");

fn main() {
    let program = parse_program("filereader.mungo", FILEREADER).expect("parses");
    let report = type_program(&program);
    for (class, derivation) in &report.derivations {
        println!("{class}: {}", derivation.summary());
    }
}
