//! Explores the usage of class File and prints it as a Graphviz graph.

use mungo::lts::{step_method, Lts};
use mungo::parser::parse_program;

const FILEREADER: &str = include_str!("../corpus/filereader.mungo");

fn main() {
    let program = parse_program("filereader.mungo", FILEREADER).expect("parses");
    let usage = &program.class("File").expect("File is declared").usage;

    let opened = step_method(usage, "open").unwrap().expect("open is offered first");
    let asked = step_method(&opened, "isEOF").unwrap().expect("then isEOF");
    println!("U --open--> {opened}");
    println!("X --isEOF--> {asked}");

    let lts = Lts::explore(usage).unwrap();
    println!("{} states, {} transitions", lts.states.len(), lts.edges.len());
    print!("{}", lts.to_dot("File"));
}
