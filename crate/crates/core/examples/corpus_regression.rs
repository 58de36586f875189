//! Runs the bundled corpus against its expectation files.

use std::path::Path;

use mungo::harness::run_corpus;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let summary = run_corpus(&dir, 100_000).expect("corpus directory is readable");
    print!("{}", summary.table());
}
