//! Parses a program, prints it back and parses the output again.

use mungo::parser::{parse_program, print_program};

const COUNTER: &str = include_str!("../corpus/counter.mungo");

fn main() {
    let program = parse_program("counter.mungo", COUNTER).expect("parses");
    let printed = print_program(&program);
    print!("{printed}");
    let again = parse_program("printed.mungo", &printed).expect("printed form parses");
    println!("round trip preserved the program: {}", again == program);
}
