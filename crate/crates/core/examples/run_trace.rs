//! Runs a program step by step and prints the first lines of its trace.

use mungo::interp::{initial_configuration, run, RunOptions};
use mungo::parser::parse_program;

const DOOR: &str = include_str!("../corpus/door.mungo");

fn main() {
    let program = parse_program("door.mungo", DOOR).expect("door parses");
    let cfg = initial_configuration(&program).expect("door has a Main class");
    let result = run(&program, cfg, &RunOptions { max_steps: 1_000, trace: true });
    for entry in result.trace.iter().take(12) {
        println!("{}  #{}", entry.line(), entry.digest);
    }
    println!("... {} steps, outcome {}", result.steps, result.outcome.label());
    println!("final configuration:\n{}", result.final_config);
}
