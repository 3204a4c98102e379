//! Runs every acceptance criterion and prints one line per criterion.

use bellseq::selftest::{criteria, DEFAULT_SEED};

fn main() {
    let results: Vec<_> = criteria().iter().map(|c| c.run(DEFAULT_SEED)).collect();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} of {} passed", results.len(), results.len());
}
