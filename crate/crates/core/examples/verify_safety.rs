//! Runs an accepted program while checking the safety invariants and
//! configuration typing at every step.

use mungo::harness::{check_source, verify_program, CheckReport, VerifyOptions};

const PROGRAM: &str = include_str!("../corpus/id_generic.mungo");

fn main() {
    let CheckReport::Accepted(program) = check_source("id_generic.mungo", PROGRAM) else {
        panic!("id_generic should type-check");
    };
    let report = verify_program(&program, &VerifyOptions { max_steps: 10_000, wtc_every_step: true });
    println!("outcome: {}", report.outcome.label());
    println!("steps: {}", report.steps);
    println!(
        "monitor hits {}, ill-formed {}, linearity {}, ill-typed {}",
        report.monitor_hits, report.wf_violations, report.linearity_violations, report.wtc_violations
    );
    for (rule, n) in &report.rule_counts {
        println!("  {rule:<7} {n}");
    }
}
