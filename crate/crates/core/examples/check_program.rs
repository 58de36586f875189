//! Type-checks the FileReader program and one of its broken variants.

use mungo::harness::check_source;

const FILEREADER: &str = include_str!("../corpus/filereader.mungo");

fn main() {
    let report = check_source("filereader.mungo", FILEREADER);
    println!("original: exit {}", report.exit_code());

    let broken = FILEREADER.replace("file = new File", "unit");
    let report = check_source("broken.mungo", &broken);
    println!("without init: exit {}", report.exit_code());
    for d in report.diagnostics() {
        println!("  {d}");
    }
}
